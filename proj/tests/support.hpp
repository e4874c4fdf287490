#pragma once

#include <pathcg/iterate.hpp>
#include <pathcg/problem.hpp>
#include <pathcg/rng.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

namespace pathcg::test {

inline VectorXd random_vec(Eigen::Index n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    StreamRng rng(seed, 0x7E57);
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = rng.uniform(lo, hi);
    return v;
}

inline MatrixXd random_mat(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
    StreamRng rng(seed, 0x3A7);
    MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
            m(i, j) = rng.uniform(-1.0, 1.0);
    return m;
}

inline double rel_err(const VectorXd &a, const VectorXd &ref) {
    const double scale = std::max(ref.cwiseAbs().maxCoeff(), 1e-300);
    return (a - ref).cwiseAbs().maxCoeff() / scale;
}

inline double rel_err(const MatrixXd &a, const MatrixXd &ref) {
    const double scale = std::max(ref.cwiseAbs().maxCoeff(), 1e-300);
    return (a - ref).cwiseAbs().maxCoeff() / scale;
}

inline std::span<const double> cspan(const VectorXd &v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline std::span<double> mspan(VectorXd &v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

/// All components of an iterate or direction in (x, u, p, lambda, theta) per
/// subsystem order.
inline VectorXd flatten(const IpmIterate &d) {
    std::vector<double> out;
    for (std::size_t j = 0; j < d.x.size(); ++j)
        for (const VectorXd *v : {&d.x[j], &d.u[j], &d.p[j], &d.lambda[j], &d.theta[j]})
            out.insert(out.end(), v->data(), v->data() + v->size());
    return Eigen::Map<VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

/// Interior iterate with random primal/costate values and duals, slacks in [0.2, 2].
inline IpmIterate random_iterate(const ProblemInstance &inst, std::uint64_t seed) {
    IpmIterate it = IpmIterate::zeros(inst);
    std::uint64_t k = seed * 977;
    for (std::size_t j = 0; j < it.x.size(); ++j) {
        it.x[j] = random_vec(it.x[j].size(), ++k);
        it.u[j] = random_vec(it.u[j].size(), ++k);
        it.p[j] = random_vec(it.p[j].size(), ++k);
        it.lambda[j] = random_vec(it.lambda[j].size(), ++k, 0.2, 2.0);
        it.theta[j] = random_vec(it.theta[j].size(), ++k, 0.2, 2.0);
    }
    return it;
}

/// N = 1, T = 1 instance with one state, one input and one constraint row.
struct ScalarData {
    double Q = 1.0, S = 0.0, R = 1.0, A = 1.0, B = 1.0, C = 1.0, D = 0.0, kappa = 1.0, QT = 1.0, xi = 0.0;
};

inline ProblemInstance scalar_instance(const ScalarData &d = {}) {
    ProblemInstance inst;
    inst.N = 1;
    inst.T = 1;
    inst.n_left = 1;
    inst.n_right = 1;
    Subsystem s;
    s.n = s.m = s.nu = 1;
    StageData s0;
    s0.Q = MatrixXd::Constant(1, 1, d.Q);
    s0.S = MatrixXd::Constant(1, 1, d.S);
    s0.R = MatrixXd::Constant(1, 1, d.R);
    s0.A = MatrixXd::Constant(1, 1, d.A);
    s0.B = MatrixXd::Constant(1, 1, d.B);
    s0.E = MatrixXd::Zero(1, 1);
    s0.F = MatrixXd::Zero(1, 1);
    s0.C = MatrixXd::Constant(1, 1, d.C);
    s0.D = MatrixXd::Constant(1, 1, d.D);
    s0.kappa = VectorXd::Constant(1, d.kappa);
    StageData s1;
    s1.Q = MatrixXd::Constant(1, 1, d.QT);
    s1.S = MatrixXd::Zero(1, 1);
    s1.R = MatrixXd::Zero(1, 1);
    s1.C = MatrixXd::Constant(1, 1, d.C);
    s1.D = MatrixXd::Zero(1, 1);
    s1.kappa = VectorXd::Constant(1, d.kappa);
    s.stages = {s0, s1};
    inst.subsystems = {s};
    inst.xi = {VectorXd::Constant(1, d.xi)};
    inst.chi = {VectorXd::Zero(1), VectorXd::Zero(1)};
    inst.zeta = {VectorXd::Zero(1), VectorXd::Zero(1)};
    return inst;
}

/// Removes every inequality (C = D = 0 and kappa = 1) keeping one slack row so
/// the interior-point machinery still has something to centre.
inline ProblemInstance without_constraints(ProblemInstance inst) {
    for (auto &s : inst.subsystems)
        for (auto &st : s.stages) {
            st.C.setZero();
            st.D.setZero();
            st.kappa.setOnes();
        }
    return inst;
}

inline RandomInstanceConfig grid_config(int N, int T) {
    RandomInstanceConfig cfg;
    cfg.N = N;
    cfg.T = T;
    return cfg;
}

} // namespace pathcg::test
