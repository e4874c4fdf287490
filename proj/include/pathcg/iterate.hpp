#pragma once

#include <pathcg/problem.hpp>

#include <vector>

namespace pathcg {

/// Primal, costate, dual and slack variables, stacked in time per subsystem:
/// x[j], p[j] of length n_j (T+1); u[j] of length m_j T; lambda[j], theta[j]
/// of length nu_j (T+1).
struct IpmIterate {
    std::vector<VectorXd> x, u, p, lambda, theta;

    static IpmIterate zeros(const ProblemInstance &inst);
    /// *this += alpha * d
    void axpy(double alpha, const IpmIterate &d);
    [[nodiscard]] double norm_inf() const;
    [[nodiscard]] Trajectory trajectory() const { return {x, u}; }
};

/// Newton direction, laid out like the iterate.
using Direction = IpmIterate;

void check_layout(const ProblemInstance &inst, const IpmIterate &it);

} // namespace pathcg
