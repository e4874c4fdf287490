#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace pathcg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Block tri-diagonal matrix with dense blocks.
///
///     [ D_0   U_1               ]
///     [ L_1   D_1   U_2         ]
///     [       L_2   D_2   ...   ]
///
/// L_k (l_k x l_{k-1}) is the sub-diagonal block coupling block k to k-1. In
/// the default layout the super-diagonal is implied, U_k = L_k'; the general
/// layout stores U_k explicitly. Diagonal blocks may be non-symmetric in
/// either layout.
class BlockTriDiag {
  public:
    BlockTriDiag() = default;
    /// Upper blocks implied as lower'.
    BlockTriDiag(std::vector<MatrixXd> diag, std::vector<MatrixXd> lower);
    /// Explicit upper blocks; upper[k] is block (k-1, k), upper[0] unused.
    BlockTriDiag(std::vector<MatrixXd> diag, std::vector<MatrixXd> lower, std::vector<MatrixXd> upper);

    [[nodiscard]] int blocks() const { return static_cast<int>(diag_.size()); }
    [[nodiscard]] std::ptrdiff_t dim() const { return offsets_.empty() ? 0 : offsets_.back(); }
    [[nodiscard]] std::ptrdiff_t offset(int k) const { return offsets_[static_cast<std::size_t>(k)]; }
    [[nodiscard]] Eigen::Index size(int k) const { return diag_[static_cast<std::size_t>(k)].rows(); }
    [[nodiscard]] bool explicit_upper() const { return !upper_.empty(); }

    [[nodiscard]] const MatrixXd &diag(int k) const { return diag_[static_cast<std::size_t>(k)]; }
    /// Block (k, k-1), k >= 1.
    [[nodiscard]] const MatrixXd &lower(int k) const { return lower_[static_cast<std::size_t>(k)]; }
    /// Block (k-1, k), k >= 1.
    [[nodiscard]] MatrixXd upper(int k) const;

    /// out = M * in. Adds the number of dense block products performed to
    /// *block_products when given.
    void matvec(std::span<const double> in, std::span<double> out, std::size_t *block_products = nullptr) const;
    [[nodiscard]] VectorXd matvec(const VectorXd &v) const;

  private:
    void init_offsets();

    std::vector<MatrixXd> diag_;
    std::vector<MatrixXd> lower_; ///< lower_[0] empty
    std::vector<MatrixXd> upper_; ///< empty unless explicit
    std::vector<std::ptrdiff_t> offsets_;
};

inline constexpr std::ptrdiff_t kDenseExportLimit = 20000;

/// Dense export for tests and small-scale solves.
MatrixXd to_dense(const BlockTriDiag &M, std::ptrdiff_t max_dim = kDenseExportLimit);

enum class PivotKind {
    Cholesky, ///< pivots are symmetric positive definite
    Lu,       ///< pivots are general; partial pivoting inside each block only
};

/// Block LDU factor from the forward recursion
///   P_0 = D_0,  P_k = D_k - L_k P_{k-1}^{-1} U_k.
/// Stores the factorised pivots P_k together with the transformed couplings
/// L_k P_{k-1}^{-1} and P_{k-1}^{-1} U_k, packed into one buffer in the order
/// the solve reads them.
class BlockLdlFactor {
  public:
    [[nodiscard]] int blocks() const { return offsets_.empty() ? 0 : static_cast<int>(offsets_.size()) - 1; }
    [[nodiscard]] std::ptrdiff_t dim() const { return offsets_.empty() ? 0 : offsets_.back(); }
    [[nodiscard]] PivotKind kind() const { return kind_; }

    /// Solves M x = b in place: one forward and one backward sweep.
    void solve_in_place(std::span<double> x) const;

  private:
    friend BlockLdlFactor ldl_factor(const BlockTriDiag &M, PivotKind kind);

    PivotKind kind_ = PivotKind::Lu;
    /// Right couplings are the transposes of the left ones and are not stored.
    bool symmetric_ = false;
    /// Forward part: P_0, then L_k P_{k-1}^{-1} and P_k for k = 1..m-1 (Cholesky
    /// factor or packed LU). Backward part: P_{k-1}^{-1} U_k for k = m-1..1.
    std::vector<double> packed_;
    std::vector<std::size_t> pivot_at_, left_at_, right_at_;
    std::vector<int> perm_; ///< LU row permutations, block k at offsets_[k]
    std::vector<std::ptrdiff_t> offsets_;
};

/// Reciprocal condition estimate below which a pivot is reported singular.
inline constexpr double kPivotRcondFloor = 1e-14;

/// Throws SingularPivotError naming the failing block index.
BlockLdlFactor ldl_factor(const BlockTriDiag &M, PivotKind kind = PivotKind::Lu);
VectorXd ldl_solve(const BlockLdlFactor &f, const VectorXd &b);

} // namespace pathcg
