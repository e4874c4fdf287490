#include "support.hpp"

#include <pathcg/errors.hpp>
#include <pathcg/kkt.hpp>
#include <pathcg/oracle.hpp>
#include <pathcg/precond.hpp>

#include <gtest/gtest.h>

using namespace pathcg;
using namespace pathcg::test;

namespace {

ReducedSystem reduced_at(const ProblemInstance &inst, std::uint64_t seed) {
    return reduce(assemble_full(inst, random_iterate(inst, seed), 0.1));
}

MatrixXd dense_psi(const ReducedSystem &red) {
    const MatrixXd M = to_dense(red.to_blocktri());
    return M * M;
}

// P A P' for P mapping paired index i to global perm[i].
MatrixXd permuted(const MatrixXd &A, const std::vector<std::ptrdiff_t> &perm) {
    const auto n = static_cast<Eigen::Index>(perm.size());
    MatrixXd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            out(i, j) = A(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    return out;
}

// Dense Delta in global order: entries of Psi whose row and column share a pair.
MatrixXd dense_delta(const ReducedSystem &red, const MatrixXd &psi) {
    std::vector<int> pair_of(static_cast<std::size_t>(red.dim()));
    for (int j = 0; j < red.N(); ++j) {
        const auto end = j + 1 < red.N() ? red.offset(j + 1) : red.dim();
        for (auto i = red.offset(j); i < end; ++i)
            pair_of[static_cast<std::size_t>(i)] = PairLayout::pair_of(j);
    }
    MatrixXd D = MatrixXd::Zero(psi.rows(), psi.cols());
    for (Eigen::Index r = 0; r < psi.rows(); ++r)
        for (Eigen::Index c = 0; c < psi.cols(); ++c)
            if (pair_of[static_cast<std::size_t>(r)] == pair_of[static_cast<std::size_t>(c)])
                D(r, c) = psi(r, c);
    return D;
}

VectorXd apply(const Preconditioner &p, const VectorXd &v) {
    VectorXd out(v.size());
    p.apply(Exec::serial(), cspan(v), mspan(out));
    return out;
}

VectorXd sigma(const PairedBlocks &pairs, const VectorXd &v) {
    // global -> paired -> sigma -> global
    const auto &lay = pairs.layout();
    VectorXd a(v.size()), b(v.size()), out(v.size());
    lay.gather(Exec::serial(), cspan(v), mspan(a));
    pairs.sigma_matvec(Exec::serial(), cspan(a), mspan(b));
    lay.scatter(Exec::serial(), cspan(b), mspan(out));
    return out;
}

} // namespace

TEST(PairLayout, PermutationIsBijection) {
    for (int N : {1, 2, 3, 5}) {
        const auto inst = random_instance(grid_config(N, 2), 3);
        const auto red = reduced_at(inst, 3);
        const PairLayout lay(red);
        EXPECT_EQ(lay.pairs(), (N + 1) / 2);
        EXPECT_EQ(lay.dim(), red.dim());
        std::vector<bool> seen(static_cast<std::size_t>(red.dim()), false);
        for (auto g : lay.permutation()) {
            ASSERT_FALSE(seen[static_cast<std::size_t>(g)]);
            seen[static_cast<std::size_t>(g)] = true;
        }
        const VectorXd v = random_vec(red.dim(), 1);
        VectorXd p(v.size()), back(v.size());
        lay.gather(Exec::serial(), cspan(v), mspan(p));
        lay.scatter(Exec::serial(), cspan(p), mspan(back));
        EXPECT_EQ(back, v);
    }
}

TEST(PairLayout, OddTailPairHasOneMember) {
    const auto inst = random_instance(grid_config(5, 3), 2);
    const auto red = reduced_at(inst, 2);
    const PairLayout lay(red);
    EXPECT_EQ(lay.second(2), -1);
    EXPECT_EQ(lay.width(2), 2 * inst.n(4));
    EXPECT_EQ(lay.size(2), 2 * inst.n(4) * (inst.T + 1));
    const auto tt = build_time_tridiag(red, lay, 2);
    EXPECT_EQ(tt.blocks.blocks(), inst.T + 1);
    for (int t = 0; t <= inst.T; ++t)
        EXPECT_EQ(tt.blocks.size(t), 2 * inst.n(4));
}

TEST(BuildPairs, SingleSubsystemIsSquareOfItsBlock) {
    const auto inst = random_instance(grid_config(1, 3), 1);
    const auto red = reduced_at(inst, 1);
    const auto pairs = build_pairs(red);
    EXPECT_EQ(pairs.pairs(), 1);
    EXPECT_LE(rel_err(pairs.to_dense(), permuted(dense_psi(red), pairs.layout().permutation())), 1e-10);
}

TEST(BuildPairs, TwoSubsystemsHaveNoSplit) {
    const auto inst = random_instance(grid_config(2, 3), 4);
    const auto red = reduced_at(inst, 4);
    const auto pairs = build_pairs(red);
    EXPECT_EQ(pairs.pairs(), 1);
    const VectorXd v = random_vec(red.dim(), 2);
    EXPECT_EQ(sigma(pairs, v).cwiseAbs().maxCoeff(), 0.0);
}

TEST(BuildPairs, PairingIdentityMatchesDenseSquare) {
    for (int N : {3, 4, 5, 6})
        for (int T : {1, 2, 4})
            for (std::uint64_t seed : {0u, 1u}) {
                const auto inst = random_instance(grid_config(N, T), seed);
                const auto red = reduced_at(inst, seed);
                const auto pairs = build_pairs(red);
                const MatrixXd ref = permuted(dense_psi(red), pairs.layout().permutation());
                EXPECT_LE(rel_err(pairs.to_dense(), ref), 1e-10) << N << " " << T << " " << seed;
            }
}

TEST(BuildTimeTridiag, PermutedDeltaMatchesStageBlocks) {
    for (int N : {2, 3, 5})
        for (int T : {1, 3})
            for (std::uint64_t seed : {0u, 2u}) {
                const auto inst = random_instance(grid_config(N, T), seed);
                const auto red = reduced_at(inst, seed);
                const PairLayout lay(red);
                const MatrixXd psi = dense_psi(red);
                for (int k = 0; k < lay.pairs(); ++k) {
                    const auto tt = build_time_tridiag(red, lay, k);
                    const MatrixXd ref = permuted(psi, tt.local_to_global);
                    const MatrixXd got = to_dense(tt.blocks);
                    EXPECT_LE((got - ref).cwiseAbs().maxCoeff(), 1e-10 * psi.cwiseAbs().maxCoeff());
                    EXPECT_EQ(got, got.transpose());
                }
            }
}

TEST(BuildTimeTridiag, ScalarTwoStageCase) {
    ScalarData d;
    const auto one = scalar_instance(d);
    ProblemInstance inst = one;
    inst.N = 2;
    inst.subsystems = {one.subsystems[0], one.subsystems[0]};
    inst.subsystems[1].stages[0].E = MatrixXd::Constant(1, 1, 0.3);
    inst.subsystems[0].stages[0].F = MatrixXd::Constant(1, 1, -0.2);
    inst.xi = {one.xi[0], one.xi[0]};
    const auto red = reduced_at(inst, 0);
    const PairLayout lay(red);
    const auto tt = build_time_tridiag(red, lay, 0);
    EXPECT_EQ(tt.blocks.blocks(), 2);
    EXPECT_EQ(tt.blocks.size(0), 4);
    EXPECT_LE(rel_err(to_dense(tt.blocks), permuted(dense_psi(red), tt.local_to_global)), 1e-10);
}

TEST(BuildTimeTridiag, DecoupledStagesAreDiagonal) {
    // A = B = 0 leave A~ = -I; Q = 0 without constraints gives Q~ = R~ = 0, so Psi = I.
    ProblemInstance inst = without_constraints(random_instance(grid_config(2, 3), 6));
    for (auto &s : inst.subsystems)
        for (auto &st : s.stages) {
            st.Q.setZero();
            st.S.setZero();
            if (st.A.size()) {
                st.A.setZero();
                st.B.setZero();
                st.E.setZero();
                st.F.setZero();
            }
        }
    const auto red = reduced_at(inst, 6);
    const PairLayout lay(red);
    const auto tt = build_time_tridiag(red, lay, 0);
    for (int t = 0; t <= inst.T; ++t) {
        const MatrixXd &X = tt.blocks.diag(t);
        EXPECT_LE((X - MatrixXd(X.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 1e-14);
        if (t > 0)
            EXPECT_EQ(tt.blocks.lower(t).norm(), 0.0);
    }
    EXPECT_LE((to_dense(tt.blocks) - MatrixXd::Identity(lay.size(0), lay.size(0))).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SigmaMatvec, EqualsDeltaMinusPsi) {
    for (int N : {3, 5, 6}) {
        const auto inst = random_instance(grid_config(N, 3), 7);
        const auto red = reduced_at(inst, 7);
        const auto pairs = build_pairs(red);
        const MatrixXd psi = dense_psi(red);
        const VectorXd v = random_vec(red.dim(), 8);
        const VectorXd ref = dense_delta(red, psi) * v - red.matvec(red.matvec(v));
        EXPECT_LE((sigma(pairs, v) - ref).cwiseAbs().maxCoeff(), 1e-10 * psi.cwiseAbs().maxCoeff());
    }
}

TEST(SigmaMatvec, BandStructure) {
    const auto inst = random_instance(grid_config(8, 2), 1);
    const auto red = reduced_at(inst, 1);
    const auto pairs = build_pairs(red);
    const auto &lay = pairs.layout();
    for (int k = 0; k < lay.pairs(); ++k) {
        VectorXd v = VectorXd::Zero(red.dim());
        v.segment(lay.offset(k), lay.size(k)) = random_vec(lay.size(k), k);
        VectorXd out(v.size());
        pairs.sigma_matvec(Exec::serial(), cspan(v), mspan(out));
        for (int q = 0; q < lay.pairs(); ++q) {
            const double nrm = out.segment(lay.offset(q), lay.size(q)).norm();
            if (std::abs(q - k) == 1)
                EXPECT_GT(nrm, 0.0);
            else
                EXPECT_EQ(nrm, 0.0);
        }
    }
}

TEST(Jacobi, ZeroMapsToZeroAndIsLinear) {
    const auto inst = random_instance(grid_config(5, 3), 2);
    const auto red = reduced_at(inst, 2);
    const auto pairs = build_pairs(red);
    const JacobiPreconditioner pre(pairs, 3);
    EXPECT_EQ(apply(pre, VectorXd::Zero(red.dim())), VectorXd::Zero(red.dim()));
    const VectorXd a = random_vec(red.dim(), 1), b = random_vec(red.dim(), 2);
    const VectorXd lhs = apply(pre, 2.5 * a - 0.75 * b);
    const VectorXd rhs = 2.5 * apply(pre, a) - 0.75 * apply(pre, b);
    EXPECT_LE(rel_err(lhs, rhs), 1e-10);
}

TEST(Jacobi, ExactWhenNoSplit) {
    for (int N : {1, 2}) {
        const auto inst = random_instance(grid_config(N, 3), 5);
        const auto red = reduced_at(inst, 5);
        const auto pairs = build_pairs(red);
        const VectorXd tau = random_vec(red.dim(), 6);
        const VectorXd ref = oracle::to_eigen(
            oracle::lu_solve(oracle::DenseMatrix::from_eigen(dense_psi(red)), oracle::to_vec(tau)));
        for (int L : {1, 2, 4})
            EXPECT_LE(rel_err(apply(JacobiPreconditioner(pairs, L), tau), ref), 1e-8);
    }
}

TEST(Jacobi, MatchesDenseSeries) {
    const auto inst = random_instance(grid_config(5, 3), 9);
    const auto red = reduced_at(inst, 9);
    const auto pairs = build_pairs(red);
    const MatrixXd psi = dense_psi(red);
    const MatrixXd delta = dense_delta(red, psi);
    const MatrixXd dinv = oracle::LuFactor(oracle::DenseMatrix::from_eigen(delta)).inverse().to_eigen();
    const MatrixXd H = dinv * (delta - psi);
    const VectorXd tau = random_vec(red.dim(), 3);
    MatrixXd W = MatrixXd::Zero(psi.rows(), psi.cols()), Hl = MatrixXd::Identity(psi.rows(), psi.cols());
    for (int L = 1; L <= 4; ++L) {
        W += Hl * dinv;
        Hl = Hl * H;
        EXPECT_LE(rel_err(apply(JacobiPreconditioner(pairs, L), tau), W * tau), 1e-9) << "L=" << L;
    }
}

TEST(Jacobi, IsSymmetricOperator) {
    const auto inst = random_instance(grid_config(6, 2), 4);
    const auto red = reduced_at(inst, 4);
    const auto pairs = build_pairs(red);
    const JacobiPreconditioner pre(pairs, 2);
    const VectorXd a = random_vec(red.dim(), 1), b = random_vec(red.dim(), 2);
    const double ab = a.dot(apply(pre, b)), ba = b.dot(apply(pre, a));
    EXPECT_NEAR(ab, ba, 1e-10 * std::max(1.0, std::abs(ab)));
    EXPECT_GT(a.dot(apply(pre, a)), 0.0);
}

TEST(Jacobi, RequiresSweeps) {
    const auto inst = msd_chain(3, 2, 0);
    const auto red = reduced_at(inst, 0);
    const auto pairs = build_pairs(red);
    EXPECT_THROW(JacobiPreconditioner(pairs, 0), DimensionError);
}

TEST(Jacobi, ThreadCountDoesNotChangeBits) {
    const auto inst = msd_chain(9, 6, 1);
    const auto red = reduced_at(inst, 1);
    const auto pairs = build_pairs(red);
    const JacobiPreconditioner pre(pairs, 3);
    const VectorXd tau = random_vec(red.dim(), 7);
    VectorXd a(tau.size()), b(tau.size());
    pre.apply(Exec::serial(), cspan(tau), mspan(a));
    pre.apply(Exec::with_threads(4), cspan(tau), mspan(b));
    EXPECT_EQ(a, b);
}

TEST(JacobiSpectrum, DenseChecksOnSmallGrid) {
    for (int N = 1; N <= 6; ++N)
        for (int T = 1; T <= 5; T += 2)
            for (std::uint64_t seed : {0u, 1u, 2u}) {
                const auto inst = random_instance(grid_config(N, T), seed);
                const auto red = reduced_at(inst, seed);
                const auto pairs = build_pairs(red);
                for (int L = 1; L <= 4; ++L) {
                    const auto d = oracle::certify(red, L, L == 1 ? &pairs : nullptr);
                    EXPECT_GT(d.w_min, 0.0);
                    EXPECT_GT(d.two_delta_min, 0.0);
                    EXPECT_LE(d.similarity_error, 1e-10);
                    EXPECT_LE(d.identity_error, 1e-10);
                    EXPECT_LT(d.rho, 1.0);
                    EXPECT_LE(d.kappa_precond, d.kappa_bound + 1e-8);
                    if (L == 1)
                        EXPECT_LE(d.pairing_error, 1e-10);
                }
            }
}
