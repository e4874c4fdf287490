#include "support.hpp"

#include <pathcg/blocktri.hpp>
#include <pathcg/errors.hpp>
#include <pathcg/oracle.hpp>

#include <gtest/gtest.h>

using namespace pathcg;
using namespace pathcg::test;

namespace {

// Random block tri-diagonal matrix; diagonally dominant and symmetric when spd.
BlockTriDiag random_blocktri(const std::vector<int> &sizes, std::uint64_t seed, bool spd) {
    std::vector<MatrixXd> diag, lower{MatrixXd()};
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        MatrixXd d = random_mat(sizes[k], sizes[k], seed * 100 + k);
        if (spd)
            d = (d * d.transpose()).eval() + 8.0 * MatrixXd::Identity(sizes[k], sizes[k]);
        diag.push_back(d);
        if (k > 0)
            lower.push_back(random_mat(sizes[k], sizes[k - 1], seed * 100 + 50 + k));
    }
    return {diag, lower};
}

} // namespace

TEST(BlockTriDiag, IdentityMatvec) {
    BlockTriDiag M({MatrixXd::Identity(2, 2), MatrixXd::Identity(3, 3)}, {MatrixXd(), MatrixXd::Zero(3, 2)});
    const VectorXd v = random_vec(5, 1);
    EXPECT_EQ(M.matvec(v), v);
}

TEST(BlockTriDiag, ScalarHandExample) {
    BlockTriDiag M({MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1)}, {MatrixXd(), MatrixXd::Ones(1, 1)});
    VectorXd v(2);
    v << 1, 2;
    VectorXd want(2);
    want << 3, 3;
    EXPECT_EQ(M.matvec(v), want);
    EXPECT_EQ(to_dense(M), MatrixXd::Ones(2, 2));
}

TEST(BlockTriDiag, SingleBlockDenseExport) {
    const MatrixXd B = random_mat(3, 3, 4);
    EXPECT_EQ(to_dense(BlockTriDiag({B}, {})), B);
}

TEST(BlockTriDiag, MatvecMatchesDense) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto M = random_blocktri({2, 3, 1, 4}, seed, false);
        const VectorXd v = random_vec(M.dim(), seed + 9);
        EXPECT_LE(rel_err(M.matvec(v), to_dense(M) * v), 1e-12);
    }
}

TEST(BlockTriDiag, ExplicitUpperMatvecMatchesDense) {
    std::vector<MatrixXd> diag{random_mat(2, 2, 1), random_mat(3, 3, 2), random_mat(2, 2, 3)};
    std::vector<MatrixXd> lower{MatrixXd(), random_mat(3, 2, 4), random_mat(2, 3, 5)};
    std::vector<MatrixXd> upper{MatrixXd(), random_mat(2, 3, 6), random_mat(3, 2, 7)};
    const BlockTriDiag M(diag, lower, upper);
    const MatrixXd D = to_dense(M);
    EXPECT_EQ(D.block(0, 2, 2, 3), upper[1]);
    const VectorXd v = random_vec(M.dim(), 8);
    EXPECT_LE(rel_err(M.matvec(v), D * v), 1e-12);
}

TEST(BlockTriDiag, SymmetricIffDiagonalBlocksSymmetric) {
    auto M = random_blocktri({2, 2, 3}, 5, false);
    EXPECT_FALSE(to_dense(M).isApprox(to_dense(M).transpose()));
    M = random_blocktri({2, 2, 3}, 5, true);
    const MatrixXd D = to_dense(M);
    EXPECT_EQ(D, D.transpose());
}

TEST(BlockTriDiag, ShapeMismatchThrows) {
    EXPECT_THROW(BlockTriDiag({MatrixXd::Identity(2, 2), MatrixXd::Identity(3, 3)}, {MatrixXd(), MatrixXd::Zero(2, 2)}),
                 DimensionError);
    EXPECT_THROW(BlockTriDiag({MatrixXd::Zero(2, 3)}, {}), DimensionError);
    const auto M = random_blocktri({2, 2}, 0, false);
    VectorXd v(3), out(4);
    EXPECT_THROW(M.matvec(cspan(v), mspan(out)), DimensionError);
}

TEST(BlockTriDiag, DenseExportLimit) {
    const auto M = random_blocktri({3, 3}, 0, false);
    EXPECT_THROW(to_dense(M, 5), DimensionError);
}

TEST(BlockTriDiag, ProductCounter) {
    const auto M = random_blocktri({1, 1, 1}, 0, false);
    std::size_t products = 0;
    VectorXd v = VectorXd::Ones(3), out(3);
    M.matvec(cspan(v), mspan(out), &products);
    EXPECT_EQ(products, 7u); // 3 diagonal + 2 lower + 2 upper
}

TEST(BlockLdl, IdentityFactorSolvesTrivially) {
    BlockTriDiag M({MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2)}, {MatrixXd(), MatrixXd::Zero(2, 2)});
    const VectorXd b = random_vec(4, 3);
    for (auto kind : {PivotKind::Cholesky, PivotKind::Lu})
        EXPECT_EQ(ldl_solve(ldl_factor(M, kind), b), b);
}

TEST(BlockLdl, ScaledIdentity) {
    BlockTriDiag M({2.0 * MatrixXd::Identity(3, 3)}, {});
    const VectorXd b = VectorXd::Constant(3, 4.0);
    EXPECT_EQ(ldl_solve(ldl_factor(M), b), VectorXd::Constant(3, 2.0));
}

TEST(BlockLdl, ZeroRhsGivesZero) {
    const auto M = random_blocktri({2, 3, 2}, 1, true);
    EXPECT_EQ(ldl_solve(ldl_factor(M, PivotKind::Cholesky), VectorXd::Zero(M.dim())), VectorXd::Zero(M.dim()));
}

TEST(BlockLdl, SpdResidualAndDenseAgreement) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto M = random_blocktri({3, 1, 2, 3, 2}, seed, true);
        const VectorXd b = random_vec(M.dim(), seed + 20);
        const auto ref = oracle::to_eigen(oracle::lu_solve(oracle::DenseMatrix::from_eigen(to_dense(M)), oracle::to_vec(b)));
        for (auto kind : {PivotKind::Cholesky, PivotKind::Lu}) {
            const VectorXd x = ldl_solve(ldl_factor(M, kind), b);
            EXPECT_LE((M.matvec(x) - b).cwiseAbs().maxCoeff(), 1e-9 * b.cwiseAbs().maxCoeff());
            EXPECT_LE(rel_err(x, ref), 1e-9);
        }
    }
}

TEST(BlockLdl, NonSymmetricLuPivots) {
    // Diagonal blocks with a negative eigenvalue: Cholesky refuses, LU solves.
    std::vector<MatrixXd> diag{MatrixXd(2, 2), MatrixXd(2, 2)};
    diag[0] << 0, 3, 1, 0;
    diag[1] << 4, 1, -2, 5;
    const BlockTriDiag M(diag, {MatrixXd(), 0.1 * random_mat(2, 2, 3)}, {MatrixXd(), 0.2 * random_mat(2, 2, 4)});
    const VectorXd b = random_vec(4, 5);
    const VectorXd x = ldl_solve(ldl_factor(M, PivotKind::Lu), b);
    EXPECT_LE((to_dense(M) * x - b).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(ldl_factor(M, PivotKind::Cholesky), SingularPivotError);
}

TEST(BlockLdl, FactorReproducesMatrixAction) {
    const auto M = random_blocktri({2, 2, 2, 2}, 7, true);
    const auto f = ldl_factor(M, PivotKind::Cholesky);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const VectorXd v = random_vec(M.dim(), seed);
        EXPECT_LE(rel_err(ldl_solve(f, M.matvec(v)), v), 1e-10);
    }
}

TEST(BlockLdl, ZeroBlockReportsItsIndex) {
    for (int bad : {0, 1, 2}) {
        std::vector<MatrixXd> diag(3, MatrixXd::Identity(2, 2));
        diag[static_cast<std::size_t>(bad)].setZero();
        const BlockTriDiag M(diag, {MatrixXd(), MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2)});
        for (auto kind : {PivotKind::Cholesky, PivotKind::Lu}) {
            try {
                (void)ldl_factor(M, kind);
                ADD_FAILURE() << "no error for block " << bad;
            } catch (const SingularPivotError &e) {
                EXPECT_EQ(e.block(), bad);
            }
        }
    }
}

TEST(BlockLdl, SolveLengthMismatchThrows) {
    const auto f = ldl_factor(random_blocktri({2, 2}, 0, true));
    VectorXd x(3);
    EXPECT_THROW(f.solve_in_place(mspan(x)), DimensionError);
}
