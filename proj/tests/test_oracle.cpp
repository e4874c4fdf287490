#include "support.hpp"

#include <pathcg/kkt.hpp>
#include <pathcg/oracle.hpp>
#include <pathcg/precond.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace pathcg;
using namespace pathcg::oracle;
using namespace pathcg::test;

namespace {

DenseMatrix dm(std::initializer_list<std::initializer_list<double>> rows) {
    DenseMatrix a(rows.size(), rows.begin()->size());
    std::size_t i = 0;
    for (const auto &r : rows) {
        std::size_t j = 0;
        for (double v : r)
            a(i, j++) = v;
        ++i;
    }
    return a;
}

ReducedSystem reduced_at(const ProblemInstance &inst, std::uint64_t seed) {
    return reduce(assemble_full(inst, random_iterate(inst, seed), 0.1));
}

} // namespace

TEST(DenseLu, IdentityReturnsRhs) {
    const Vec b{1, -2, 3};
    EXPECT_EQ(lu_solve(DenseMatrix::identity(3), b), b);
}

TEST(DenseLu, PermutationNeedsPivoting) {
    const Vec x = lu_solve(dm({{0, 1}, {1, 0}}), {1, 2});
    EXPECT_DOUBLE_EQ(x[0], 2.0);
    EXPECT_DOUBLE_EQ(x[1], 1.0);
}

TEST(DenseLu, RandomResidual) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const MatrixXd A = random_mat(12, 12, seed) + 6.0 * MatrixXd::Identity(12, 12);
        const VectorXd b = random_vec(12, seed + 1);
        const VectorXd x = to_eigen(lu_solve(DenseMatrix::from_eigen(A), to_vec(b)));
        EXPECT_LE((A * x - b).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(DenseLu, InverseAndMatrixSolve) {
    const MatrixXd A = random_mat(6, 6, 3) + 4.0 * MatrixXd::Identity(6, 6);
    const LuFactor lu(DenseMatrix::from_eigen(A));
    EXPECT_LE((A * lu.inverse().to_eigen() - MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-12);
    const MatrixXd B = random_mat(6, 2, 4);
    EXPECT_LE((A * lu.solve(DenseMatrix::from_eigen(B)).to_eigen() - B).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DenseLu, SingularThrows) {
    EXPECT_THROW(LuFactor(dm({{1, 2}, {2, 4}})), std::runtime_error);
    EXPECT_THROW(LuFactor(DenseMatrix(2, 3)), std::invalid_argument);
}

TEST(SymEigen, Diagonal) {
    const Vec e = sym_eigenvalues(dm({{3, 0, 0}, {0, 1, 0}, {0, 0, 2}}));
    EXPECT_EQ(e, (Vec{1, 2, 3}));
}

TEST(SymEigen, Swap) {
    const Vec e = sym_eigenvalues(dm({{0, 1}, {1, 0}}));
    EXPECT_NEAR(e[0], -1.0, 1e-15);
    EXPECT_NEAR(e[1], 1.0, 1e-15);
}

TEST(SymEigen, GramMatrixIsPsd) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const MatrixXd B = random_mat(5, 9, seed);
        const Vec e = sym_eigenvalues(DenseMatrix::from_eigen(B.transpose() * B));
        EXPECT_GE(e.front(), -1e-9);
        // rank 5 of 9: four zero eigenvalues
        EXPECT_LE(std::abs(e[3]), 1e-9);
        EXPECT_GT(e[4], 1e-6);
    }
}

TEST(SymEigen, MatchesCharacteristicPolynomialOf2x2) {
    const Vec e = sym_eigenvalues(dm({{2, 1}, {1, 3}}));
    EXPECT_NEAR(e[0], (5 - std::sqrt(5.0)) / 2, 1e-14);
    EXPECT_NEAR(e[1], (5 + std::sqrt(5.0)) / 2, 1e-14);
}

TEST(SymEigen, RejectsAsymmetric) { EXPECT_THROW(sym_eigenvalues(dm({{0, 1}, {0, 0}})), std::invalid_argument); }

TEST(SpectralRadius, Examples) {
    EXPECT_EQ(spectral_radius(DenseMatrix(3, 3)), 0.0);
    EXPECT_NEAR(spectral_radius(dm({{0.3, 0}, {0, -0.9}})), 0.9, 1e-15);
}

TEST(SpectralRadius, NonSymmetricPowerIteration) {
    // Upper triangular, eigenvalues 0.5 and -0.8.
    EXPECT_NEAR(spectral_radius(dm({{0.5, 2.0}, {0.0, -0.8}})), 0.8, 1e-6);
    // Similarity transform of diag(0.7, 0.2, -0.1).
    const MatrixXd S = random_mat(3, 3, 2) + 3.0 * MatrixXd::Identity(3, 3);
    const MatrixXd D = Eigen::Vector3d(0.7, 0.2, -0.1).asDiagonal();
    EXPECT_NEAR(spectral_radius(DenseMatrix::from_eigen(S * D * S.inverse())), 0.7, 1e-6);
}

TEST(Cholesky, FactorAndTriangularSolve) {
    const MatrixXd B = random_mat(5, 5, 1);
    const MatrixXd A = B * B.transpose() + MatrixXd::Identity(5, 5);
    const DenseMatrix L = cholesky(DenseMatrix::from_eigen(A));
    EXPECT_LE((L.to_eigen() * L.to_eigen().transpose() - A).cwiseAbs().maxCoeff(), 1e-12);
    const MatrixXd R = random_mat(5, 2, 3);
    EXPECT_LE((L.to_eigen() * lower_solve(L, DenseMatrix::from_eigen(R)).to_eigen() - R).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(cholesky(dm({{1, 2}, {2, 1}})), std::runtime_error);
}

TEST(DenseMatrixOps, Arithmetic) {
    const DenseMatrix a = dm({{1, 2}, {3, 4}});
    const DenseMatrix p = a * a;
    EXPECT_EQ(p(0, 0), 7.0);
    EXPECT_EQ(p(1, 1), 22.0);
    EXPECT_EQ((a - a).max_abs(), 0.0);
    EXPECT_EQ((2.0 * a)(1, 0), 6.0);
    EXPECT_EQ(a.transpose()(0, 1), 3.0);
    EXPECT_TRUE(p.is_finite());
    EXPECT_FALSE(a.is_symmetric(0.0));
    EXPECT_EQ((a * Vec{1, 1}), (Vec{3, 7}));
}

TEST(DenseKkt, MatchesStructuredAssembly) {
    // Two independent assemblies of the same Newton system.
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto inst = random_instance(grid_config(3, 3), seed);
        const auto it = random_iterate(inst, seed);
        const auto sys = assemble_full(inst, it, 0.2);
        const auto kkt = dense_kkt(inst, it, 0.2);
        EXPECT_LE(rel_err(to_dense(sys.to_blocktri()), kkt.K.to_eigen()), 1e-14);
        EXPECT_LE(rel_err(sys.stacked_rhs(), to_eigen(kkt.b)), 1e-14);
    }
}

TEST(DenseKkt, ScalarComplementarityRow) {
    // lambda = theta = 1, x = u = p = 0: theta rows read -(1 - sigma mu).
    const auto inst = scalar_instance();
    IpmIterate it = IpmIterate::zeros(inst);
    it.lambda[0].setOnes();
    it.theta[0].setOnes();
    const auto kkt = dense_kkt(inst, it, 0.1);
    const std::size_t theta0 = kkt.K.rows() - 2;
    EXPECT_NEAR(kkt.b[theta0], -1.0 + 0.1, 1e-15);
    EXPECT_NEAR(kkt.b[theta0 + 1], -1.0 + 0.1, 1e-15);
}

TEST(Certify, PairOfTwoIsExact) {
    for (int L : {1, 2, 3}) {
        const auto inst = random_instance(grid_config(2, 3), 1);
        const auto red = reduced_at(inst, 1);
        const auto d = certify(red, L);
        EXPECT_LE(d.rho, 1e-12);
        EXPECT_NEAR(d.kappa_precond, 1.0, 1e-9);
        EXPECT_NEAR(d.kappa_bound, 1.0, 1e-12);
    }
}

TEST(Certify, MoreSweepsNeverHurt) {
    const auto inst = random_instance(grid_config(5, 4), 3);
    const auto red = reduced_at(inst, 3);
    const auto d1 = certify(red, 1);
    const auto d2 = certify(red, 2);
    EXPECT_LE(d2.kappa_precond, d1.kappa_precond + 1e-8);
    EXPECT_LT(d1.rho, 1.0);
}

TEST(Certify, BoundHoldsOnMsdChain) {
    const auto inst = msd_chain(6, 5, 3);
    const auto red = reduce(assemble_full(inst, random_iterate(inst, 0), 0.1));
    const auto pairs = build_pairs(red);
    const auto d = certify(red, 2, &pairs);
    EXPECT_LE(d.kappa_precond, d.kappa_bound + 1e-8);
    EXPECT_GT(d.w_min, 0.0);
    EXPECT_GT(d.two_delta_min, 0.0);
    EXPECT_LE(d.pairing_error, 1e-10);
}

TEST(Certify, RefusesLargeSystems) {
    const auto inst = msd_chain(40, 30, 0);
    const auto red = reduced_at(inst, 0);
    EXPECT_THROW(certify(red, 2), std::invalid_argument);
}
