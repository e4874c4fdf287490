#pragma once

#include <pathcg/exec.hpp>
#include <pathcg/kkt.hpp>
#include <pathcg/precond.hpp>

#include <optional>
#include <span>
#include <vector>

namespace pathcg {

/// Psi = M^2 for the reduced matrix M; every action is two reduced matvecs.
class PsiOperator {
  public:
    explicit PsiOperator(const ReducedSystem &red) : red_(&red) {}

    [[nodiscard]] const ReducedSystem &reduced() const { return *red_; }
    [[nodiscard]] std::ptrdiff_t dim() const { return red_->dim(); }

    void apply(const Exec &exec, std::span<const double> in, std::span<double> out) const;
    [[nodiscard]] VectorXd apply(const VectorXd &v, const Exec &exec = {}) const;
    /// M b, the right-hand side of the squared system for M x = b.
    [[nodiscard]] VectorXd squared_rhs(const VectorXd &b, const Exec &exec = {}) const;

  private:
    const ReducedSystem *red_;
};

struct PcgConfig {
    double eps = 1e-9;             ///< infinity-norm residual tolerance
    long iter_max = 0;             ///< 0 means 10 N T
    int recompute_every = 50;      ///< true residual refresh period
    bool keep_history = true;
};

struct SolveReport {
    long iterations = 0;
    bool converged = false;
    bool breakdown = false;
    double residual = 0.0;               ///< final true residual, infinity norm
    std::vector<double> history;         ///< residual infinity norms, iterations + 1 entries
    double setup_seconds = 0.0;          ///< reduction and preconditioner build
    double solve_seconds = 0.0;
    std::optional<double> rho;           ///< spectral diagnostics when requested
    std::optional<double> kappa;
};

struct SolveResult {
    VectorXd x;
    SolveReport report;
};

[[nodiscard]] long default_iter_max(const ReducedSystem &red);

/// Preconditioned CG on Psi x = M b from x = 0. Returns the best iterate
/// (lowest residual seen) when the cap is hit. A curvature d' Psi d <= 1e-300
/// stops the iteration with report.breakdown set.
SolveResult pcg_solve(const PsiOperator &op, const Preconditioner &pre, const VectorXd &b, const PcgConfig &cfg = {},
                      const Exec &exec = {});

/// Block Jacobi iteration x+ = x + Delta^{-1}(M b - Psi x) from x = 0.
SolveResult jacobi_solve(const PsiOperator &op, const PairedBlocks &pairs, const VectorXd &b, double eps = 1e-9,
                         long iter_max = 0, const Exec &exec = {});

/// 2 ((sqrt(kappa) - 1) / (sqrt(kappa) + 1))^i; throws for kappa < 1.
double cg_error_bound(double kappa, long i);

} // namespace pathcg
