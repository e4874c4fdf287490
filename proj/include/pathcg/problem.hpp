#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace pathcg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Data of subsystem j at time t.
///
/// Cost terms are x'Qx + 2u'Sx + u'Ru. Dynamics are
/// x_{j,t+1} = A x_{j,t} + B u_{j,t} + E x_{j-1,t} + F x_{j+1,t}, present only
/// for t < T (empty matrices at the terminal stage). Constraints are
/// C x + D u <= kappa. At t = T the input is absent: S, R and D are stored as
/// correctly sized zero matrices.
struct StageData {
    MatrixXd Q, S, R;
    MatrixXd A, B, E, F;
    MatrixXd C, D;
    VectorXd kappa;
};

struct Subsystem {
    int n = 0;  ///< state size
    int m = 0;  ///< input size
    int nu = 0; ///< constraint rows
    std::vector<StageData> stages; ///< t = 0..T
};

/// Constrained finite-horizon LQ problem over a path graph of N subsystems.
///
/// Subsystems are stored 0-based; subsystem index j in code corresponds to
/// node j+1 of the chain. The spatial boundary nodes 0 and N+1 carry the fixed
/// trajectories chi and zeta.
struct ProblemInstance {
    int N = 0;
    int T = 0;
    int n_left = 0;  ///< state size of boundary node 0
    int n_right = 0; ///< state size of boundary node N+1
    std::vector<Subsystem> subsystems;
    std::vector<VectorXd> xi;   ///< initial states, one per subsystem
    std::vector<VectorXd> chi;  ///< left boundary, t = 0..T
    std::vector<VectorXd> zeta; ///< right boundary, t = 0..T

    [[nodiscard]] const Subsystem &sub(int j) const { return subsystems[static_cast<std::size_t>(j)]; }
    [[nodiscard]] const StageData &stage(int j, int t) const {
        return sub(j).stages[static_cast<std::size_t>(t)];
    }
    [[nodiscard]] int n(int j) const { return sub(j).n; }
    [[nodiscard]] int m(int j) const { return sub(j).m; }
    [[nodiscard]] int nu(int j) const { return sub(j).nu; }
    /// State size of the left neighbour of j (boundary node for j = 0).
    [[nodiscard]] int n_prev(int j) const { return j == 0 ? n_left : n(j - 1); }
    [[nodiscard]] int n_next(int j) const { return j == N - 1 ? n_right : n(j + 1); }

    /// Total count of scalar decision variables (x, u) of the stacked QP.
    [[nodiscard]] std::int64_t variable_count() const;
    /// Sum over j of nu_j (T+1).
    [[nodiscard]] std::int64_t constraint_count() const;
};

/// Primal trajectory, stacked in time per subsystem:
/// x[j] = col(x_{j,0..T}), u[j] = col(u_{j,0..T-1}).
struct Trajectory {
    std::vector<VectorXd> x, u;

    static Trajectory zeros(const ProblemInstance &inst);
};

struct Violation {
    int j = -1; ///< 0-based subsystem, -1 for instance-level violations
    int t = -1;
    std::string what;
};

/// Checks dimensions and the convexity assumptions. Violations are data.
std::vector<Violation> validate(const ProblemInstance &inst, double tol_psd = 1e-9);

/// Mass-spring-damper chain generator settings.
struct MsdChainConfig {
    double h = 0.1;        ///< forward-Euler step
    double x_max = 4.0;    ///< |position| bound
    double u_max = 2.0;    ///< |input| bound
    double param_lo = 0.8; ///< mass, spring and damper drawn uniform on [lo, hi]
    double param_hi = 1.5;
    double xi_lo = -1.0; ///< initial states drawn uniform on [lo, hi]
    double xi_hi = 1.0;
};

/// Chain of N masses with walls at both ends (chi = zeta = 0). State
/// (position, velocity), one force input, four box-constraint rows.
ProblemInstance msd_chain(int N, int T, std::uint64_t seed, const MsdChainConfig &cfg = {});

/// Random heterogeneous instance used by the test-suite: state, input and
/// constraint sizes vary per subsystem, every matrix is dense.
struct RandomInstanceConfig {
    int N = 3;
    int T = 3;
    int n_max = 3;
    int m_max = 2;
    int nu_max = 3;
    bool heterogeneous = true;
    double coupling = 0.3; ///< scale of E and F
    double kappa = 5.0;    ///< kappa drawn uniform on [kappa/2, kappa]
};
ProblemInstance random_instance(const RandomInstanceConfig &cfg, std::uint64_t seed);

/// Relabels j -> N+1-j, swapping E and F and the two spatial boundaries.
ProblemInstance reflect(const ProblemInstance &inst);

/// Objective (1/2) sum_j sum_t l_{j,t}(x_{j,t}, u_{j,t}).
double evaluate_cost(const ProblemInstance &inst, const Trajectory &traj);

struct ResidualReport {
    /// dynamics[j] stacked like x[j]: block 0 is x_{j,0} - xi_j, block t+1 is
    /// x_{j,t+1} - A x_{j,t} - B u_{j,t} - E x_{j-1,t} - F x_{j+1,t}.
    std::vector<VectorXd> dynamics;
    /// max(0, C x + D u - kappa), stacked in time.
    std::vector<VectorXd> constraint;
    /// C x + D u + theta - kappa when slacks were supplied.
    std::vector<VectorXd> slack;
    double max_dynamics = 0.0;
    double max_constraint = 0.0;
    double max_slack = 0.0;
};

ResidualReport residuals(const ProblemInstance &inst, const Trajectory &traj,
                         const std::vector<VectorXd> *slacks = nullptr);

/// Propagates the dynamics from xi under the given inputs (u[j] stacked).
Trajectory simulate(const ProblemInstance &inst, const std::vector<VectorXd> &inputs);

} // namespace pathcg
