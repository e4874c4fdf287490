#pragma once

#include <pathcg/blocktri.hpp>
#include <pathcg/exec.hpp>
#include <pathcg/kkt.hpp>

#include <Eigen/SparseCore>

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pathcg {

/// Grouping of subsystems {2k, 2k+1} (0-based) into K = ceil(N/2) pairs, with
/// the time-major ordering used inside each pair: stage t of pair k holds
/// [x_{a,t}, p_{a,t}, x_{b,t}, p_{b,t}] for its members a = 2k, b = 2k+1.
/// The odd-N tail pair has one member.
class PairLayout {
  public:
    PairLayout() = default;
    explicit PairLayout(const ReducedSystem &red);

    [[nodiscard]] int pairs() const { return K_; }
    [[nodiscard]] int T() const { return T_; }
    [[nodiscard]] int first(int k) const { return 2 * k; }
    /// Second member, or -1 for a single-subsystem tail pair.
    [[nodiscard]] int second(int k) const { return 2 * k + 1 < N_ ? 2 * k + 1 : -1; }
    [[nodiscard]] static int pair_of(int j) { return j / 2; }
    /// Stage width 2(n_a + n_b).
    [[nodiscard]] Eigen::Index width(int k) const { return width_[static_cast<std::size_t>(k)]; }
    /// Offset of node j inside its pair's stage vector.
    [[nodiscard]] Eigen::Index node_offset(int j) const { return node_offset_[static_cast<std::size_t>(j)]; }
    [[nodiscard]] std::ptrdiff_t offset(int k) const { return offsets_[static_cast<std::size_t>(k)]; }
    [[nodiscard]] std::ptrdiff_t size(int k) const { return offsets_[static_cast<std::size_t>(k) + 1] - offset(k); }
    [[nodiscard]] std::ptrdiff_t dim() const { return offsets_.back(); }

    /// perm[i] is the reduced-system index stored at paired index i.
    [[nodiscard]] const std::vector<std::ptrdiff_t> &permutation() const { return perm_; }

    void gather(const Exec &exec, std::span<const double> global, std::span<double> paired) const;
    void scatter(const Exec &exec, std::span<const double> paired, std::span<double> global) const;

  private:
    int N_ = 0, T_ = 0, K_ = 0;
    std::vector<Eigen::Index> width_;
    std::vector<Eigen::Index> node_offset_;
    std::vector<std::ptrdiff_t> offsets_;
    std::vector<std::ptrdiff_t> perm_;
};

/// Diagonal pair block Delta_k in time-major order, blktrid(Xi_k, Pi_k).
struct TimeTridiagPair {
    int k = 0;
    BlockTriDiag blocks; ///< Xi_{k,t} on the diagonal, Pi_{k,t} coupling stage t+1 to t
    /// local_to_global[i] is the reduced-system index of pair-local index i.
    std::vector<std::ptrdiff_t> local_to_global;
};

/// Builds Delta_k from node-level products of the reduced matrix.
TimeTridiagPair build_time_tridiag(const ReducedSystem &red, const PairLayout &layout, int k);

/// Pair repartition of Psi = M^2 (M the reduced matrix): Psi = blktrid(Delta, Upsilon),
/// with the time-major ordering of PairLayout. Upsilon_k couples pair k to
/// pair k-1 and is itself tri-diagonal in time.
class PairedBlocks {
  public:
    [[nodiscard]] const PairLayout &layout() const { return layout_; }
    [[nodiscard]] int pairs() const { return layout_.pairs(); }
    [[nodiscard]] const TimeTridiagPair &delta(int k) const { return delta_[static_cast<std::size_t>(k)]; }
    using Coupling = Eigen::SparseMatrix<double, Eigen::RowMajor>;
    /// Upsilon_k in pair-local coordinates (rows of pair k, columns of pair
    /// k-1), structural zeros dropped. Empty for k = 0.
    [[nodiscard]] const Coupling &upsilon(int k) const { return upsilon_[static_cast<std::size_t>(k)]; }
    [[nodiscard]] bool factored() const { return !factors_.empty(); }

    /// Cholesky block LDL of every Delta_k; throws SingularPivotError with the
    /// pair index k (0-based).
    void factor(const Exec &exec = {});

    // Paired-layout kernels.
    void delta_matvec(const Exec &exec, std::span<const double> in, std::span<double> out) const;
    void delta_solve(const Exec &exec, std::span<const double> in, std::span<double> out) const;
    /// out = (Delta - Psi) in = -(Upsilon_k in_{k-1} + Upsilon_{k+1}' in_{k+1}) per pair.
    void sigma_matvec(const Exec &exec, std::span<const double> in, std::span<double> out) const;

    /// Dense Psi in paired order, for tests.
    [[nodiscard]] MatrixXd to_dense() const;

  private:
    friend PairedBlocks build_pairs(const ReducedSystem &red, const Exec &exec);

    PairLayout layout_;
    std::vector<TimeTridiagPair> delta_;
    std::vector<Coupling> upsilon_;
    std::vector<BlockLdlFactor> factors_;
};

/// Builds and factors the pair blocks.
PairedBlocks build_pairs(const ReducedSystem &red, const Exec &exec = {});

/// Preconditioner interface for the Krylov solvers: out = P^{-1} in, both in
/// reduced-system layout.
class Preconditioner {
  public:
    virtual ~Preconditioner() = default;
    virtual void apply(const Exec &exec, std::span<const double> in, std::span<double> out) const = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
  public:
    void apply(const Exec &exec, std::span<const double> in, std::span<double> out) const override;
    [[nodiscard]] std::string name() const override { return "identity"; }
};

/// L block Jacobi sweeps from zero on Psi = Delta - Sigma:
///   Delta z1 = tau,  Delta z(l+1) = tau + Sigma z(l).
/// Represents W_L = sum_{l<L} (Delta^{-1} Sigma)^l Delta^{-1} without forming it.
class JacobiPreconditioner final : public Preconditioner {
  public:
    JacobiPreconditioner(const PairedBlocks &pairs, int sweeps);

    void apply(const Exec &exec, std::span<const double> in, std::span<double> out) const override;
    [[nodiscard]] std::string name() const override { return "jacobi(" + std::to_string(sweeps_) + ")"; }
    [[nodiscard]] int sweeps() const { return sweeps_; }

  private:
    const PairedBlocks *pairs_;
    int sweeps_;
};

} // namespace pathcg
