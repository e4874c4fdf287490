#include "support.hpp"

#include <pathcg/errors.hpp>
#include <pathcg/krylov.hpp>
#include <pathcg/oracle.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace pathcg;
using namespace pathcg::test;

namespace {

ReducedSystem reduced_at(const ProblemInstance &inst, std::uint64_t seed) {
    return reduce(assemble_full(inst, random_iterate(inst, seed), 0.1));
}

VectorXd dense_reduced_solve(const ReducedSystem &red) {
    return oracle::to_eigen(oracle::lu_solve(oracle::DenseMatrix::from_eigen(to_dense(red.to_blocktri())),
                                             oracle::to_vec(red.rhs())));
}

// Textbook CG on a dense SPD matrix, fixed iteration count.
VectorXd naive_cg(const MatrixXd &A, const VectorXd &b, long iters) {
    VectorXd x = VectorXd::Zero(b.size()), r = b, d = r;
    double rr = r.dot(r);
    for (long i = 0; i < iters && rr > 0; ++i) {
        const VectorXd Ad = A * d;
        const double a = rr / d.dot(Ad);
        x += a * d;
        r -= a * Ad;
        const double rr_new = r.dot(r);
        d = r + (rr_new / rr) * d;
        rr = rr_new;
    }
    return x;
}

} // namespace

TEST(CgErrorBound, Examples) {
    EXPECT_EQ(cg_error_bound(1.0, 7), 0.0);
    EXPECT_EQ(cg_error_bound(50.0, 0), 2.0);
    EXPECT_DOUBLE_EQ(cg_error_bound(9.0, 1), 1.0);
    EXPECT_DOUBLE_EQ(cg_error_bound(9.0, 3), 0.25);
    EXPECT_THROW(cg_error_bound(0.5, 1), std::invalid_argument);
    EXPECT_THROW(cg_error_bound(2.0, -1), std::invalid_argument);
}

TEST(Pcg, ZeroRhsNeedsNoIterations) {
    const auto inst = msd_chain(3, 3, 1);
    const auto red = reduced_at(inst, 1);
    const auto pairs = build_pairs(red);
    const auto res = pcg_solve(PsiOperator(red), JacobiPreconditioner(pairs, 2), VectorXd::Zero(red.dim()));
    EXPECT_EQ(res.report.iterations, 0);
    EXPECT_TRUE(res.report.converged);
    EXPECT_EQ(res.x, VectorXd::Zero(red.dim()));
    EXPECT_EQ(res.report.history.size(), 1u);
}

TEST(Pcg, ExactPairPreconditionerForTwoSubsystems) {
    for (int N : {1, 2})
        for (std::uint64_t seed : {0u, 1u, 2u}) {
            const auto inst = random_instance(grid_config(N, 4), seed);
            const auto red = reduced_at(inst, seed);
            const auto pairs = build_pairs(red);
            PcgConfig cfg;
            cfg.eps = 1e-10;
            const auto res = pcg_solve(PsiOperator(red), JacobiPreconditioner(pairs, 1), red.rhs(), cfg);
            EXPECT_TRUE(res.report.converged);
            EXPECT_LE(res.report.iterations, 3);
            const auto jac = jacobi_solve(PsiOperator(red), pairs, red.rhs(), 1e-10);
            EXPECT_TRUE(jac.report.converged);
            EXPECT_EQ(jac.report.iterations, 1);
        }
}

TEST(Pcg, ExactDensePreconditioner) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto inst = random_instance(grid_config(5, 3), seed);
        const auto red = reduced_at(inst, seed);
        PcgConfig cfg;
        cfg.eps = 1e-10;
        const auto res = pcg_solve(PsiOperator(red), oracle::ExactDensePreconditioner(red), red.rhs(), cfg);
        EXPECT_TRUE(res.report.converged);
        EXPECT_LE(res.report.iterations, 3);
    }
}

TEST(Pcg, MatchesDenseReducedSolve) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto inst = random_instance(grid_config(6, 5), seed);
        const auto red = reduced_at(inst, seed);
        const auto pairs = build_pairs(red);
        PcgConfig cfg;
        cfg.eps = 1e-10;
        const auto res = pcg_solve(PsiOperator(red), JacobiPreconditioner(pairs, 2), red.rhs(), cfg);
        EXPECT_TRUE(res.report.converged);
        EXPECT_LE(rel_err(res.x, dense_reduced_solve(red)), 1e-6);
        EXPECT_EQ(res.report.history.size(), static_cast<std::size_t>(res.report.iterations) + 1);
        EXPECT_LE(res.report.residual, 1e-10);
    }
}

TEST(Pcg, IdentityPreconditionerIsPlainCg) {
    const auto inst = random_instance(grid_config(3, 2), 4);
    const auto red = reduced_at(inst, 4);
    const PsiOperator op(red);
    const MatrixXd M = to_dense(red.to_blocktri());
    const VectorXd rhs = M * red.rhs();
    for (long k : {1, 3, 6}) {
        PcgConfig cfg;
        cfg.eps = 1e-300;
        cfg.iter_max = k;
        const auto res = pcg_solve(op, IdentityPreconditioner(), red.rhs(), cfg);
        ASSERT_EQ(res.report.iterations, k);
        EXPECT_LE(rel_err(res.x, naive_cg(M * M, rhs, k)), 1e-8) << k;
    }
}

TEST(Pcg, IterationsWithinCgBound) {
    for (std::uint64_t seed = 0; seed < 2; ++seed) {
        const auto inst = random_instance(grid_config(5, 3), seed);
        const auto red = reduced_at(inst, seed);
        const auto pairs = build_pairs(red);
        const PsiOperator op(red);
        const int L = 2;
        const double kappa = oracle::certify(red, L).kappa_precond;
        const MatrixXd M = to_dense(red.to_blocktri());
        const MatrixXd psi = M * M;
        const VectorXd xs = dense_reduced_solve(red);
        auto energy = [&](const VectorXd &e) { return std::sqrt(e.dot(psi * e)); };
        const double e0 = energy(xs);
        const double f = 1e-4;
        long predicted = 0;
        while (cg_error_bound(kappa, predicted) > f)
            ++predicted;
        long measured = -1;
        for (long k = 1; k <= predicted + 2 && measured < 0; ++k) {
            PcgConfig cfg;
            cfg.eps = 1e-300;
            cfg.iter_max = k;
            const auto res = pcg_solve(op, JacobiPreconditioner(pairs, L), red.rhs(), cfg);
            if (energy(res.x - xs) <= f * e0)
                measured = k;
        }
        EXPECT_GE(measured, 1) << "bound " << predicted << " kappa " << kappa;
    }
}

TEST(Pcg, MoreSweepsFewerIterations) {
    const auto inst = msd_chain(8, 6, 2);
    const auto red = reduced_at(inst, 2);
    const auto pairs = build_pairs(red);
    PcgConfig cfg;
    cfg.eps = 1e-9;
    long prev = std::numeric_limits<long>::max();
    for (int L : {1, 2, 4, 8}) {
        const auto res = pcg_solve(PsiOperator(red), JacobiPreconditioner(pairs, L), red.rhs(), cfg);
        EXPECT_TRUE(res.report.converged);
        EXPECT_LE(res.report.iterations, prev) << "L=" << L;
        prev = res.report.iterations;
    }
}

TEST(Pcg, CapReturnsBestIterate) {
    const auto inst = msd_chain(6, 6, 1);
    const auto red = reduced_at(inst, 1);
    PcgConfig cfg;
    cfg.eps = 1e-14;
    cfg.iter_max = 3;
    const auto res = pcg_solve(PsiOperator(red), IdentityPreconditioner(), red.rhs(), cfg);
    EXPECT_FALSE(res.report.converged);
    EXPECT_EQ(res.report.iterations, 3);
    double best = res.report.history.front();
    for (double h : res.report.history)
        best = std::min(best, h);
    const VectorXd r = PsiOperator(red).squared_rhs(red.rhs()) - PsiOperator(red).apply(res.x);
    EXPECT_NEAR(r.cwiseAbs().maxCoeff(), res.report.residual, 1e-12 * std::max(1.0, res.report.residual));
    EXPECT_LE(res.report.residual, best * (1 + 1e-9));
}

TEST(Pcg, DefaultCapIsTenNT) {
    const auto inst = msd_chain(4, 7, 0);
    const auto red = reduced_at(inst, 0);
    EXPECT_EQ(default_iter_max(red), 280);
}

TEST(Pcg, RejectsBadInput) {
    const auto inst = msd_chain(2, 2, 0);
    const auto red = reduced_at(inst, 0);
    PcgConfig cfg;
    cfg.eps = 0.0;
    EXPECT_THROW(pcg_solve(PsiOperator(red), IdentityPreconditioner(), red.rhs(), cfg), std::invalid_argument);
    EXPECT_THROW(pcg_solve(PsiOperator(red), IdentityPreconditioner(), VectorXd::Zero(3)), DimensionError);
}

TEST(JacobiSolve, ConvergesToDenseSolution) {
    const auto inst = msd_chain(6, 4, 3);
    const auto red = reduced_at(inst, 3);
    const auto pairs = build_pairs(red);
    const auto res = jacobi_solve(PsiOperator(red), pairs, red.rhs(), 1e-10, 100000);
    EXPECT_TRUE(res.report.converged);
    EXPECT_GT(res.report.iterations, 1);
    EXPECT_LE(rel_err(res.x, dense_reduced_solve(red)), 1e-6);
}

TEST(PsiOperator, IsReducedMatrixSquared) {
    const auto inst = random_instance(grid_config(4, 3), 2);
    const auto red = reduced_at(inst, 2);
    const MatrixXd M = to_dense(red.to_blocktri());
    const VectorXd v = random_vec(red.dim(), 5);
    const PsiOperator op(red);
    EXPECT_LE(rel_err(op.apply(v), M * (M * v)), 1e-12);
    EXPECT_LE(rel_err(op.squared_rhs(v), M * v), 1e-12);
}

TEST(Exec, ThreadCountDoesNotChangePcgBits) {
    const auto inst = msd_chain(12, 10, 5);
    const auto red = reduced_at(inst, 5);
    const auto pairs = build_pairs(red);
    const JacobiPreconditioner pre(pairs, 2);
    const auto a = pcg_solve(PsiOperator(red), pre, red.rhs(), {}, Exec::serial());
    const auto b = pcg_solve(PsiOperator(red), pre, red.rhs(), {}, Exec::with_threads(3));
    EXPECT_EQ(a.report.iterations, b.report.iterations);
    EXPECT_EQ(a.x, b.x);
}
