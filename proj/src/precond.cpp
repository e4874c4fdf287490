#include <pathcg/precond.hpp>

#include <pathcg/errors.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace pathcg {

namespace {

using ConstSeg = Eigen::Map<const VectorXd>;
using Seg = Eigen::Map<VectorXd>;

enum Kind { X = 0, P = 1 };

// One nonzero quadrant of a node block of the reduced matrix M. mat == nullptr
// stands for -I.
struct Term {
    int r = X, c = X;
    const MatrixXd *mat = nullptr;
    bool transposed = false;
};

struct Link {
    int j = 0, t = 0;
    std::array<Term, 4> terms{};
    int count = 0;
    void add(int r, int c, const MatrixXd *m, bool tr = false) { terms[count++] = Term{r, c, m, tr}; }
};

struct Links {
    std::array<Link, 7> items{};
    int count = 0;
    Link &push(int j, int t) {
        items[count] = Link{j, t};
        return items[count++];
    }
};

// Row (j, t) of M in node blocks; node (j, t) carries (x_{j,t}, p_{j,t}).
Links node_links(const ReducedSystem &red, int j, int t) {
    const ProblemInstance &inst = red.instance();
    const ReducedSubsystem &s = red.sub(j);
    const int N = red.N(), T = red.T();
    Links out;
    Link &self = out.push(j, t);
    self.add(X, X, &s.Qt[t]);
    self.add(X, P, nullptr);
    self.add(P, X, nullptr);
    self.add(P, P, &s.Rt[t]);
    if (t > 0) {
        out.push(j, t - 1).add(P, X, &s.At[t - 1]);
        if (j > 0)
            out.push(j - 1, t - 1).add(P, X, &inst.stage(j, t - 1).E);
        if (j + 1 < N)
            out.push(j + 1, t - 1).add(P, X, &inst.stage(j, t - 1).F);
    }
    if (t < T) {
        out.push(j, t + 1).add(X, P, &s.At[t], true);
        if (j + 1 < N)
            out.push(j + 1, t + 1).add(X, P, &inst.stage(j + 1, t).E, true);
        if (j > 0)
            out.push(j - 1, t + 1).add(X, P, &inst.stage(j - 1, t).F, true);
    }
    return out;
}

template <class Dst>
void add_product(Dst &&dst, const Term &a, const Term &b) {
    if (!a.mat && !b.mat) {
        dst.diagonal().array() += 1.0;
    } else if (!a.mat) {
        if (b.transposed)
            dst -= b.mat->transpose();
        else
            dst -= *b.mat;
    } else if (!b.mat) {
        if (a.transposed)
            dst -= a.mat->transpose();
        else
            dst -= *a.mat;
    } else if (a.transposed && b.transposed) {
        dst.noalias() += a.mat->transpose() * b.mat->transpose();
    } else if (a.transposed) {
        dst.noalias() += a.mat->transpose() * *b.mat;
    } else if (b.transposed) {
        dst.noalias() += *a.mat * b.mat->transpose();
    } else {
        dst.noalias() += *a.mat * *b.mat;
    }
}

// Accumulates the rows of pair k of Psi = M^2: the diagonal pair block into
// xi / lower (time-major stages), and when ups is given the coupling to pair
// k-1. Blocks of |dt| = 2 vanish structurally and couplings to pairs > k are
// the transposes of those stored with the higher pair.
void accumulate_pair(const ReducedSystem &red, const PairLayout &layout, int k, std::vector<MatrixXd> &xi,
                     std::vector<MatrixXd> &lower, std::vector<std::array<MatrixXd, 3>> *ups) {
    const int T = red.T();
    const Eigen::Index w = layout.width(k);
    xi.assign(T + 1, MatrixXd::Zero(w, w));
    lower.assign(T + 1, MatrixXd());
    for (int t = 1; t <= T; ++t)
        lower[t] = MatrixXd::Zero(w, w);
    if (ups) {
        const Eigen::Index wp = layout.width(k - 1);
        ups->assign(T + 1, {});
        for (int t = 0; t <= T; ++t)
            for (int d = -1; d <= 1; ++d)
                if (t + d >= 0 && t + d <= T)
                    (*ups)[t][d + 1] = MatrixXd::Zero(w, wp);
    }

    for (int j : {layout.first(k), layout.second(k)}) {
        if (j < 0)
            continue;
        const Eigen::Index na = red.sub(j).n;
        for (int t = 0; t <= T; ++t) {
            const Links la = node_links(red, j, t);
            for (int ib = 0; ib < la.count; ++ib) {
                const Link &ab = la.items[ib];
                const Links lb = node_links(red, ab.j, ab.t);
                for (int ic = 0; ic < lb.count; ++ic) {
                    const Link &bc = lb.items[ic];
                    const int dt = bc.t - t;
                    const int kc = PairLayout::pair_of(bc.j);
                    MatrixXd *target = nullptr;
                    if (kc == k && dt == 0)
                        target = &xi[t];
                    else if (kc == k && dt == -1)
                        target = &lower[t];
                    else if (ups && kc == k - 1 && std::abs(dt) <= 1)
                        target = &(*ups)[t][dt + 1];
                    if (!target)
                        continue;
                    const Eigen::Index nc = red.sub(bc.j).n;
                    const Eigen::Index ra = layout.node_offset(j), rc = layout.node_offset(bc.j);
                    for (int i1 = 0; i1 < ab.count; ++i1)
                        for (int i2 = 0; i2 < bc.count; ++i2) {
                            const Term &a = ab.terms[i1];
                            const Term &b = bc.terms[i2];
                            if (a.c != b.r)
                                continue;
                            add_product(target->block(ra + a.r * na, rc + b.c * nc, na, nc), a, b);
                        }
                }
            }
        }
    }
    for (auto &m : xi)
        m = 0.5 * (m + m.transpose()).eval();
}

std::vector<std::ptrdiff_t> pair_indices(const PairLayout &layout, int k) {
    const auto &perm = layout.permutation();
    return {perm.begin() + layout.offset(k), perm.begin() + layout.offset(k) + layout.size(k)};
}

} // namespace

PairLayout::PairLayout(const ReducedSystem &red) : N_(red.N()), T_(red.T()), K_((red.N() + 1) / 2) {
    node_offset_.assign(N_, 0);
    offsets_.assign(1, 0);
    for (int k = 0; k < K_; ++k) {
        const int a = first(k), b = second(k);
        Eigen::Index w = 2 * red.sub(a).n;
        if (b >= 0) {
            node_offset_[b] = w;
            w += 2 * red.sub(b).n;
        }
        width_.push_back(w);
        offsets_.push_back(offsets_.back() + w * (T_ + 1));
        for (int t = 0; t <= T_; ++t)
            for (int j : {a, b}) {
                if (j < 0)
                    continue;
                for (int i = 0; i < red.sub(j).n; ++i)
                    perm_.push_back(red.x_index(j, t) + i);
                for (int i = 0; i < red.sub(j).n; ++i)
                    perm_.push_back(red.p_index(j, t) + i);
            }
    }
}

void PairLayout::gather(const Exec &exec, std::span<const double> global, std::span<double> paired) const {
    if (static_cast<std::ptrdiff_t>(global.size()) != dim() || static_cast<std::ptrdiff_t>(paired.size()) != dim())
        throw DimensionError("pair gather: vector length differs from system dimension");
    parallel_for(exec, K_, [&](std::ptrdiff_t k) {
        for (std::ptrdiff_t i = offsets_[k]; i < offsets_[k + 1]; ++i)
            paired[i] = global[perm_[i]];
    });
}

void PairLayout::scatter(const Exec &exec, std::span<const double> paired, std::span<double> global) const {
    if (static_cast<std::ptrdiff_t>(global.size()) != dim() || static_cast<std::ptrdiff_t>(paired.size()) != dim())
        throw DimensionError("pair scatter: vector length differs from system dimension");
    parallel_for(exec, K_, [&](std::ptrdiff_t k) {
        for (std::ptrdiff_t i = offsets_[k]; i < offsets_[k + 1]; ++i)
            global[perm_[i]] = paired[i];
    });
}

TimeTridiagPair build_time_tridiag(const ReducedSystem &red, const PairLayout &layout, int k) {
    if (k < 0 || k >= layout.pairs())
        throw DimensionError("pair index " + std::to_string(k) + " out of range");
    std::vector<MatrixXd> xi, lower;
    accumulate_pair(red, layout, k, xi, lower, nullptr);
    return {k, BlockTriDiag(std::move(xi), std::move(lower)), pair_indices(layout, k)};
}

PairedBlocks build_pairs(const ReducedSystem &red, const Exec &exec) {
    PairedBlocks pb;
    pb.layout_ = PairLayout(red);
    const int K = pb.layout_.pairs();
    pb.delta_.resize(K);
    pb.upsilon_.resize(K);
    parallel_for(exec, K, [&](std::ptrdiff_t kk) {
        const int k = static_cast<int>(kk);
        std::vector<MatrixXd> xi, lower;
        std::vector<std::array<MatrixXd, 3>> ups;
        accumulate_pair(red, pb.layout_, k, xi, lower, k > 0 ? &ups : nullptr);
        pb.delta_[k] = {k, BlockTriDiag(std::move(xi), std::move(lower)), pair_indices(pb.layout_, k)};
        if (k == 0)
            return;
        // The dense stage blocks are mostly structural zeros on chain models.
        const Eigen::Index w = pb.layout_.width(k), wp = pb.layout_.width(k - 1);
        std::vector<Eigen::Triplet<double>> nz;
        for (std::size_t t = 0; t < ups.size(); ++t)
            for (int d = -1; d <= 1; ++d) {
                const MatrixXd &B = ups[t][static_cast<std::size_t>(d + 1)];
                for (Eigen::Index c = 0; c < B.cols(); ++c)
                    for (Eigen::Index r = 0; r < B.rows(); ++r)
                        if (B(r, c) != 0.0)
                            nz.emplace_back(static_cast<Eigen::Index>(t) * w + r,
                                            (static_cast<Eigen::Index>(t) + d) * wp + c, B(r, c));
            }
        auto &U = pb.upsilon_[k];
        U.resize(pb.layout_.size(k), pb.layout_.size(k - 1));
        U.setFromTriplets(nz.begin(), nz.end());
        U.makeCompressed();
    });
    pb.factor(exec);
    return pb;
}

void PairedBlocks::factor(const Exec &exec) {
    std::vector<BlockLdlFactor> f(delta_.size());
    parallel_for(exec, static_cast<std::ptrdiff_t>(delta_.size()), [&](std::ptrdiff_t k) {
        try {
            f[k] = ldl_factor(delta_[k].blocks, PivotKind::Cholesky);
        } catch (const SingularPivotError &e) {
            throw SingularPivotError(static_cast<int>(k),
                                     "pair " + std::to_string(k + 1) + ", stage " + std::to_string(e.block()) + ": " +
                                         e.what());
        }
    });
    factors_ = std::move(f);
}

void PairedBlocks::delta_matvec(const Exec &exec, std::span<const double> in, std::span<double> out) const {
    parallel_for(exec, pairs(), [&](std::ptrdiff_t k) {
        const auto o = static_cast<std::size_t>(layout_.offset(static_cast<int>(k)));
        const auto n = static_cast<std::size_t>(layout_.size(static_cast<int>(k)));
        delta_[k].blocks.matvec(in.subspan(o, n), out.subspan(o, n));
    });
}

void PairedBlocks::delta_solve(const Exec &exec, std::span<const double> in, std::span<double> out) const {
    if (!factored())
        throw DimensionError("pair blocks used before factorisation");
    parallel_for(exec, pairs(), [&](std::ptrdiff_t k) {
        const auto o = static_cast<std::size_t>(layout_.offset(static_cast<int>(k)));
        const auto n = static_cast<std::size_t>(layout_.size(static_cast<int>(k)));
        std::copy_n(in.data() + o, n, out.data() + o);
        factors_[k].solve_in_place(out.subspan(o, n));
    });
}

void PairedBlocks::sigma_matvec(const Exec &exec, std::span<const double> in, std::span<double> out) const {
    if (static_cast<std::ptrdiff_t>(in.size()) != layout_.dim() ||
        static_cast<std::ptrdiff_t>(out.size()) != layout_.dim())
        throw DimensionError("sigma matvec: vector length differs from system dimension");
    const int K = pairs();
    parallel_for(exec, K, [&](std::ptrdiff_t kk) {
        const int k = static_cast<int>(kk);
        Seg y(out.data() + layout_.offset(k), layout_.size(k));
        y.setZero();
        if (k > 0)
            y.noalias() -= upsilon_[k] * ConstSeg(in.data() + layout_.offset(k - 1), layout_.size(k - 1));
        if (k + 1 < K)
            y.noalias() -=
                upsilon_[k + 1].transpose() * ConstSeg(in.data() + layout_.offset(k + 1), layout_.size(k + 1));
    });
}

MatrixXd PairedBlocks::to_dense() const {
    const int K = pairs();
    MatrixXd D = MatrixXd::Zero(layout_.dim(), layout_.dim());
    for (int k = 0; k < K; ++k) {
        D.block(layout_.offset(k), layout_.offset(k), layout_.size(k), layout_.size(k)) =
            pathcg::to_dense(delta_[k].blocks);
        if (k == 0)
            continue;
        const MatrixXd U = MatrixXd(upsilon_[k]);
        D.block(layout_.offset(k), layout_.offset(k - 1), U.rows(), U.cols()) = U;
        D.block(layout_.offset(k - 1), layout_.offset(k), U.cols(), U.rows()) = U.transpose();
    }
    return D;
}

void IdentityPreconditioner::apply(const Exec &exec, std::span<const double> in, std::span<double> out) const {
    parallel_for(exec, (static_cast<std::ptrdiff_t>(in.size()) + kReduceChunk - 1) / kReduceChunk,
                 [&](std::ptrdiff_t c) {
                     const auto lo = static_cast<std::size_t>(c * kReduceChunk);
                     const auto hi = std::min(in.size(), lo + static_cast<std::size_t>(kReduceChunk));
                     std::copy(in.begin() + lo, in.begin() + hi, out.begin() + lo);
                 });
}

JacobiPreconditioner::JacobiPreconditioner(const PairedBlocks &pairs, int sweeps) : pairs_(&pairs), sweeps_(sweeps) {
    if (sweeps < 1)
        throw DimensionError("Jacobi preconditioner needs at least one sweep");
    if (!pairs.factored())
        throw DimensionError("Jacobi preconditioner needs factored pair blocks");
}

void JacobiPreconditioner::apply(const Exec &exec, std::span<const double> in, std::span<double> out) const {
    const PairLayout &lay = pairs_->layout();
    const auto n = static_cast<std::size_t>(lay.dim());
    if (in.size() != n || out.size() != n)
        throw DimensionError("preconditioner: vector length differs from system dimension");
    // Reused across calls: freeing buffers this large hands pages back to the
    // OS, and the page faults on reallocation dominated the apply at N = T = 200.
    thread_local std::vector<double> work;
    if (work.size() < 3 * n)
        work.resize(3 * n);
    std::span<double> ts(work.data(), n), zs(work.data() + n, n), ws(work.data() + 2 * n, n);
    lay.gather(exec, in, ts);
    pairs_->delta_solve(exec, ts, zs);
    for (int l = 1; l < sweeps_; ++l) {
        pairs_->sigma_matvec(exec, zs, ws);
        axpy(exec, 1.0, ts, ws);
        pairs_->delta_solve(exec, ws, zs);
    }
    lay.scatter(exec, zs, out);
}

} // namespace pathcg
