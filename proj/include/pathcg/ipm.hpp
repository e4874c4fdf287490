#pragma once

#include <pathcg/exec.hpp>
#include <pathcg/iterate.hpp>
#include <pathcg/krylov.hpp>
#include <pathcg/problem.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace pathcg {

enum class InnerSolver {
    Pcg,      ///< PCG on the squared reduced system with L Jacobi sweeps
    Jacobi,   ///< plain block Jacobi on the squared reduced system
    Direct,   ///< block LDL over subsystems on the reduced system
    Dense,    ///< dense LU of the reduced system
    DenseKkt, ///< dense LU of the full Newton system (small instances)
};

std::string to_string(InnerSolver s);
/// Accepts pcg, jacobi, direct (or direct-ldl), dense, dense-kkt.
InnerSolver parse_inner_solver(const std::string &name);

struct IpmConfig {
    double eps_ipm = 1e-6;   ///< duality gap tolerance
    double eps_feas = 1e-6;  ///< infinity-norm tolerance on the linear residuals
    double sigma = 0.1;
    double gamma_ftb = 0.995;
    int max_newton = 50;
    InnerSolver solver = InnerSolver::Pcg;
    int L = 2;
    double eps_inner = 1e-9;
    long inner_iter_max = 0; ///< 0 means 10 N T
    Exec exec{};
    std::ostream *progress = nullptr; ///< one tab-separated line per Newton step
};

IpmIterate initialize(const ProblemInstance &inst);

/// sum_j lambda_j' theta_j / sum_j nu_j (T+1); 0 without constraints.
double duality_gap(const IpmIterate &it);

/// min(1, gamma alpha_max) keeping lambda and theta strictly positive.
double step_size(const IpmIterate &it, const Direction &d, double gamma_ftb = 0.995);

struct NewtonResult {
    Direction delta;
    SolveReport inner;
};

NewtonResult newton_step(const ProblemInstance &inst, const IpmIterate &it, double sigma_mu, const IpmConfig &cfg);

struct StepRecord {
    int n = 0;
    double mu = 0.0;
    double alpha = 0.0;
    double residual = 0.0; ///< linear KKT residual before the step
    long inner_iterations = 0;
    bool inner_converged = true;
    double seconds = 0.0;
};

struct IpmResult {
    IpmIterate iterate;
    bool converged = false;
    int newton_steps = 0;
    double mu = 0.0;
    double residual = 0.0;
    double cost = 0.0;
    double seconds = 0.0;
    std::vector<StepRecord> steps;

    [[nodiscard]] Trajectory trajectory() const { return iterate.trajectory(); }
    [[nodiscard]] long max_inner_iterations() const;
    [[nodiscard]] double avg_inner_iterations() const;
};

/// Infinity norm of the stationarity, dynamics and constraint residuals.
double kkt_residual(const ProblemInstance &inst, const IpmIterate &it);

IpmResult solve(const ProblemInstance &inst, const IpmConfig &cfg = {});

} // namespace pathcg
