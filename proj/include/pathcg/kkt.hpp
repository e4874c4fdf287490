#pragma once

#include <pathcg/blocktri.hpp>
#include <pathcg/exec.hpp>
#include <pathcg/iterate.hpp>
#include <pathcg/problem.hpp>

#include <Eigen/Cholesky>

#include <span>
#include <vector>

namespace pathcg {

/// Right-hand side blocks of one subsystem's rows of the linearised KKT
/// system, ordered like the iterate (x, u, p, lambda, theta).
struct KktRhs {
    VectorXd x, u, p, lambda, theta;
};

/// Linearised KKT system at an interior iterate.
///
/// Stage data is read from the instance; the per-subsystem diagonal blocks
/// Phi_j (5x5 block grid over x, u, p, lambda, theta) and couplings Omega_j
/// are only materialised by to_blocktri(), which is meant for small
/// instances.
struct FullKktSystem {
    const ProblemInstance *inst = nullptr;
    std::vector<VectorXd> lambda, theta; ///< diagonals of Lambda_j, Theta_j
    std::vector<KktRhs> rhs;
    double sigma_mu = 0.0;

    /// Size of the x, u, p, lambda, theta blocks of subsystem j combined.
    [[nodiscard]] std::ptrdiff_t block_size(int j) const;
    [[nodiscard]] BlockTriDiag to_blocktri() const;
    /// col(b_1, ..., b_N).
    [[nodiscard]] VectorXd stacked_rhs() const;
};

/// Complementarity target Theta lambda + Lambda theta - Lambda Theta 1 + sigma mu 1.
VectorXd eta(const IpmIterate &it, int j, double sigma_mu);

/// Diagonal entries below this floor make an iterate non-interior.
inline constexpr double kInteriorFloor = 1e-300;

/// Throws NonInteriorError unless lambda, theta >= kInteriorFloor.
FullKktSystem assemble_full(const ProblemInstance &inst, const IpmIterate &it, double sigma_mu,
                            const Exec &exec = {});

/// Instrumentation filled by reduce(): the largest matrix formed and the count
/// of small dense products.
struct ReductionStats {
    Eigen::Index largest_rows = 0;
    Eigen::Index largest_cols = 0;
    std::size_t products = 0;
};

/// Reduced (x, p) data of one subsystem plus the elimination cache.
///
/// Q~ and R~ are block diagonal over t = 0..T (R~_0 = 0), A~ is block
/// bi-diagonal with -I on the diagonal and A~_t on the sub-diagonal coupling
/// p_{t+1} to x_t.
struct ReducedSubsystem {
    int n = 0, m = 0, nu = 0;
    std::vector<MatrixXd> Qt; ///< T+1 blocks, n x n
    std::vector<MatrixXd> Rt; ///< T+1 blocks, n x n
    std::vector<MatrixXd> At; ///< T blocks, n x n

    // elimination cache
    std::vector<Eigen::LLT<MatrixXd>> Rhat; ///< T factors, m x m
    std::vector<MatrixXd> Shat;             ///< T blocks, m x n
    VectorXd w;                             ///< Theta^{-1} Lambda diagonal
    VectorXd bu_hat;
    VectorXd b_lambda, b_theta;
    VectorXd lambda, theta;
};

/// Symmetric block tri-diagonal system in (dx_j, dp_j), j = 1..N.
///
/// Vector layout: subsystem blocks in order; inside block j first
/// x_{j,0..T} then p_{j,0..T}.
class ReducedSystem {
  public:
    [[nodiscard]] const ProblemInstance &instance() const { return *inst_; }
    [[nodiscard]] int N() const { return inst_->N; }
    [[nodiscard]] int T() const { return inst_->T; }
    [[nodiscard]] std::ptrdiff_t dim() const { return offsets_.back(); }
    [[nodiscard]] std::ptrdiff_t offset(int j) const { return offsets_[static_cast<std::size_t>(j)]; }
    [[nodiscard]] std::ptrdiff_t x_index(int j, int t) const { return offset(j) + static_cast<std::ptrdiff_t>(t) * sub(j).n; }
    [[nodiscard]] std::ptrdiff_t p_index(int j, int t) const {
        return offset(j) + static_cast<std::ptrdiff_t>(T() + 1 + t) * sub(j).n;
    }
    [[nodiscard]] const ReducedSubsystem &sub(int j) const { return subs_[static_cast<std::size_t>(j)]; }
    [[nodiscard]] const VectorXd &rhs() const { return rhs_; }
    [[nodiscard]] const ReductionStats &stats() const { return stats_; }

    /// out = blktrid(Phi~, Omega~) in; parallel over subsystems.
    void matvec(const Exec &exec, std::span<const double> in, std::span<double> out) const;
    [[nodiscard]] VectorXd matvec(const VectorXd &v, const Exec &exec = {}) const;

    /// Dense Phi~_j and Omega~_j blocks (memory O(N T^2)).
    [[nodiscard]] BlockTriDiag to_blocktri() const;

  private:
    friend ReducedSystem reduce(const FullKktSystem &sys, const Exec &exec);

    const ProblemInstance *inst_ = nullptr;
    std::vector<ReducedSubsystem> subs_;
    std::vector<std::vector<double>> packed_; ///< matvec blocks per subsystem, in read order
    std::vector<std::ptrdiff_t> offsets_;
    VectorXd rhs_;
    ReductionStats stats_;
};

/// Eliminates theta, lambda and u (in that order). Throws NonInteriorError
/// when some R^_j,t is not positive definite.
ReducedSystem reduce(const FullKktSystem &sys, const Exec &exec = {});

/// Recovers du, dlambda and dtheta from a solution of the reduced system.
Direction recover(const ReducedSystem &red, std::span<const double> delta_xp, const Exec &exec = {});

} // namespace pathcg
