#include <pathcg/blocktri.hpp>

#include <pathcg/errors.hpp>

#include "small_kernels.hpp"

#include <algorithm>
#include <string>
#include <variant>

namespace pathcg {

namespace {

using ConstSeg = Eigen::Map<const VectorXd>;
using Seg = Eigen::Map<VectorXd>;

constexpr Eigen::Index kSmallBlock = 16;

} // namespace

BlockTriDiag::BlockTriDiag(std::vector<MatrixXd> diag, std::vector<MatrixXd> lower)
    : diag_(std::move(diag)), lower_(std::move(lower)) {
    if (diag_.empty())
        throw DimensionError("block tri-diagonal matrix needs at least one block");
    if (lower_.empty())
        lower_.emplace_back();
    if (lower_.size() != diag_.size())
        throw DimensionError("lower block count must equal diagonal block count (index 0 unused)");
    init_offsets();
}

BlockTriDiag::BlockTriDiag(std::vector<MatrixXd> diag, std::vector<MatrixXd> lower, std::vector<MatrixXd> upper)
    : diag_(std::move(diag)), lower_(std::move(lower)), upper_(std::move(upper)) {
    if (diag_.empty())
        throw DimensionError("block tri-diagonal matrix needs at least one block");
    if (lower_.empty())
        lower_.emplace_back();
    if (upper_.empty())
        upper_.emplace_back();
    if (lower_.size() != diag_.size() || upper_.size() != diag_.size())
        throw DimensionError("off-diagonal block counts must equal diagonal block count (index 0 unused)");
    init_offsets();
    for (int k = 1; k < blocks(); ++k)
        if (upper_[k].rows() != size(k - 1) || upper_[k].cols() != size(k))
            throw DimensionError("upper block " + std::to_string(k) + " has wrong shape");
}

void BlockTriDiag::init_offsets() {
    offsets_.assign(1, 0);
    for (int k = 0; k < blocks(); ++k) {
        const auto &d = diag_[k];
        if (d.rows() != d.cols())
            throw DimensionError("diagonal block " + std::to_string(k) + " is not square");
        if (k > 0 && (lower_[k].rows() != d.rows() || lower_[k].cols() != diag_[k - 1].rows()))
            throw DimensionError("lower block " + std::to_string(k) + " has wrong shape");
        offsets_.push_back(offsets_.back() + d.rows());
    }
}

MatrixXd BlockTriDiag::upper(int k) const {
    if (explicit_upper())
        return upper_[static_cast<std::size_t>(k)];
    return lower_[static_cast<std::size_t>(k)].transpose();
}

void BlockTriDiag::matvec(std::span<const double> in, std::span<double> out, std::size_t *block_products) const {
    if (static_cast<std::ptrdiff_t>(in.size()) != dim() || static_cast<std::ptrdiff_t>(out.size()) != dim())
        throw DimensionError("block tri-diagonal matvec: vector length differs from matrix dimension");
    std::size_t count = 0;
    for (int k = 0; k < blocks(); ++k) {
        Seg y(out.data() + offset(k), size(k));
        y.noalias() = diag_[k] * ConstSeg(in.data() + offset(k), size(k));
        ++count;
        if (k > 0) {
            y.noalias() += lower_[k] * ConstSeg(in.data() + offset(k - 1), size(k - 1));
            ++count;
        }
        if (k + 1 < blocks()) {
            ConstSeg v(in.data() + offset(k + 1), size(k + 1));
            if (explicit_upper())
                y.noalias() += upper_[k + 1] * v;
            else
                y.noalias() += lower_[k + 1].transpose() * v;
            ++count;
        }
    }
    if (block_products)
        *block_products += count;
}

VectorXd BlockTriDiag::matvec(const VectorXd &v) const {
    VectorXd out(dim());
    matvec(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())),
           std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
    return out;
}

MatrixXd to_dense(const BlockTriDiag &M, std::ptrdiff_t max_dim) {
    if (M.dim() > max_dim)
        throw DimensionError("dense export refused: dimension " + std::to_string(M.dim()) + " exceeds limit " +
                             std::to_string(max_dim));
    MatrixXd D = MatrixXd::Zero(M.dim(), M.dim());
    for (int k = 0; k < M.blocks(); ++k) {
        D.block(M.offset(k), M.offset(k), M.size(k), M.size(k)) = M.diag(k);
        if (k > 0) {
            D.block(M.offset(k), M.offset(k - 1), M.size(k), M.size(k - 1)) = M.lower(k);
            D.block(M.offset(k - 1), M.offset(k), M.size(k - 1), M.size(k)) = M.upper(k);
        }
    }
    return D;
}

BlockLdlFactor ldl_factor(const BlockTriDiag &M, PivotKind kind) {
    using Pivot = std::variant<Eigen::LLT<MatrixXd>, Eigen::PartialPivLU<MatrixXd>>;
    const int m = M.blocks();
    BlockLdlFactor f;
    f.kind_ = kind;
    f.symmetric_ = kind == PivotKind::Cholesky && !M.explicit_upper();
    f.offsets_.reserve(static_cast<std::size_t>(m) + 1);
    for (int k = 0; k <= m; ++k)
        f.offsets_.push_back(k < m ? M.offset(k) : M.dim());

    auto factor_pivot = [&](int k, const MatrixXd &P) -> Pivot {
        if (P.size() == 0)
            return Eigen::LLT<MatrixXd>(P);
        if (kind == PivotKind::Cholesky) {
            Eigen::LLT<MatrixXd> llt(P);
            if (llt.info() != Eigen::Success)
                throw SingularPivotError(k, "pivot block not positive definite");
            if (llt.rcond() < kPivotRcondFloor)
                throw SingularPivotError(k, "pivot block singular to working precision");
            return llt;
        }
        Eigen::PartialPivLU<MatrixXd> lu(P);
        if (!(lu.rcond() >= kPivotRcondFloor))
            throw SingularPivotError(k, "pivot block singular to working precision");
        return lu;
    };
    auto solve_with = [](const Pivot &p, const MatrixXd &rhs) -> MatrixXd {
        return std::visit([&](const auto &fac) -> MatrixXd { return fac.solve(rhs); }, p);
    };

    std::size_t total = 0;
    for (int k = 0; k < m; ++k) {
        total += static_cast<std::size_t>(M.diag(k).size());
        if (k > 0)
            total += static_cast<std::size_t>(M.lower(k).size()) * (f.symmetric_ ? 1 : 2);
    }
    f.packed_.reserve(total);
    f.pivot_at_.resize(m);
    f.left_at_.resize(m);
    f.right_at_.resize(m);
    if (kind == PivotKind::Lu)
        f.perm_.resize(static_cast<std::size_t>(M.dim()));
    auto append = [&](const MatrixXd &A) {
        const std::size_t at = f.packed_.size();
        f.packed_.insert(f.packed_.end(), A.data(), A.data() + A.size());
        return at;
    };
    auto store_pivot = [&](int k, const Pivot &p) {
        if (kind == PivotKind::Cholesky) {
            f.pivot_at_[k] = append(std::get<Eigen::LLT<MatrixXd>>(p).matrixLLT());
            return;
        }
        const auto &lu = std::get<Eigen::PartialPivLU<MatrixXd>>(p);
        f.pivot_at_[k] = append(lu.matrixLU());
        const auto &idx = lu.permutationP().indices();
        std::copy(idx.data(), idx.data() + idx.size(), f.perm_.begin() + f.offsets_[k]);
    };

    std::vector<MatrixXd> right(m);
    Pivot prev = factor_pivot(0, M.diag(0));
    store_pivot(0, prev);
    for (int k = 1; k < m; ++k) {
        const MatrixXd U = M.upper(k);
        right[k] = solve_with(prev, U);
        MatrixXd left;
        if (kind == PivotKind::Lu)
            left = M.lower(k) * std::get<Eigen::PartialPivLU<MatrixXd>>(prev).inverse();
        else if (M.explicit_upper())
            left = solve_with(prev, M.lower(k).transpose()).transpose();
        else
            left = right[k].transpose();
        f.left_at_[k] = append(left);
        MatrixXd P = M.diag(k);
        P.noalias() -= M.lower(k) * right[k];
        prev = factor_pivot(k, P);
        store_pivot(k, prev);
    }
    for (int k = m - 1; k >= 1; --k)
        f.right_at_[k] = f.symmetric_ ? f.left_at_[k] : append(right[k]);
    return f;
}

void BlockLdlFactor::solve_in_place(std::span<double> x) const {
    if (static_cast<std::ptrdiff_t>(x.size()) != dim())
        throw DimensionError("block LDL solve: right-hand side length differs from matrix dimension");
    using ConstMat = Eigen::Map<const MatrixXd>;
    const int m = blocks();
    auto seg = [&](int k) { return Seg(x.data() + offsets_[k], offsets_[k + 1] - offsets_[k]); };
    auto pivot_solve = [&](int k) {
        auto xk = seg(k);
        const Eigen::Index s = xk.size();
        if (s == 0)
            return;
        const ConstMat P(packed_.data() + pivot_at_[k], s, s);
        if (kind_ == PivotKind::Cholesky) {
            if (s <= kSmallBlock) {
                detail::small_cholesky_solve(P.data(), s, xk.data());
            } else {
                P.triangularView<Eigen::Lower>().solveInPlace(xk);
                P.transpose().triangularView<Eigen::Upper>().solveInPlace(xk);
            }
            return;
        }
        const Eigen::Map<const Eigen::VectorXi> idx(perm_.data() + offsets_[k], s);
        VectorXd tmp = Eigen::PermutationWrapper<const Eigen::Map<const Eigen::VectorXi>>(idx) * xk;
        P.triangularView<Eigen::UnitLower>().solveInPlace(tmp);
        P.triangularView<Eigen::Upper>().solveInPlace(tmp);
        xk = tmp;
    };
    auto size = [&](int k) { return offsets_[k + 1] - offsets_[k]; };
    // x_to -= A x_from (A' when trans); plain loops only pay off for small blocks
    auto couple = [&](std::size_t at, Eigen::Index rows, Eigen::Index cols, bool trans, int from, int to) {
        if (std::max(rows, cols) <= kSmallBlock) {
            detail::small_gemv_sub(packed_.data() + at, rows, cols, trans, x.data() + offsets_[from],
                                   x.data() + offsets_[to]);
            return;
        }
        const ConstMat A(packed_.data() + at, rows, cols);
        if (trans)
            seg(to).noalias() -= A.transpose() * seg(from);
        else
            seg(to).noalias() -= A * seg(from);
    };
    // Forward elimination with the block-diagonal solve one block behind, so
    // each step reads its coupling and the previous pivot together.
    for (int k = 1; k < m; ++k) {
        couple(left_at_[k], size(k), size(k - 1), false, k - 1, k);
        pivot_solve(k - 1);
    }
    pivot_solve(m - 1);
    for (int k = m - 1; k >= 1; --k) {
        if (symmetric_)
            couple(right_at_[k], size(k), size(k - 1), true, k, k - 1);
        else
            couple(right_at_[k], size(k - 1), size(k), false, k, k - 1);
    }
}

VectorXd ldl_solve(const BlockLdlFactor &f, const VectorXd &b) {
    VectorXd x = b;
    f.solve_in_place(std::span<double>(x.data(), static_cast<std::size_t>(x.size())));
    return x;
}

} // namespace pathcg
