#include <pathcg/iterate.hpp>

#include <pathcg/errors.hpp>

#include <algorithm>

namespace pathcg {

IpmIterate IpmIterate::zeros(const ProblemInstance &inst) {
    IpmIterate it;
    const int T = inst.T;
    for (int j = 0; j < inst.N; ++j) {
        it.x.push_back(VectorXd::Zero(inst.n(j) * (T + 1)));
        it.u.push_back(VectorXd::Zero(inst.m(j) * T));
        it.p.push_back(VectorXd::Zero(inst.n(j) * (T + 1)));
        it.lambda.push_back(VectorXd::Zero(inst.nu(j) * (T + 1)));
        it.theta.push_back(VectorXd::Zero(inst.nu(j) * (T + 1)));
    }
    return it;
}

void IpmIterate::axpy(double alpha, const IpmIterate &d) {
    for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] += alpha * d.x[j];
        u[j] += alpha * d.u[j];
        p[j] += alpha * d.p[j];
        lambda[j] += alpha * d.lambda[j];
        theta[j] += alpha * d.theta[j];
    }
}

double IpmIterate::norm_inf() const {
    double m = 0.0;
    for (const auto *group : {&x, &u, &p, &lambda, &theta})
        for (const auto &v : *group)
            if (v.size())
                m = std::max(m, v.cwiseAbs().maxCoeff());
    return m;
}

void check_layout(const ProblemInstance &inst, const IpmIterate &it) {
    const auto N = static_cast<std::size_t>(inst.N);
    if (it.x.size() != N || it.u.size() != N || it.p.size() != N || it.lambda.size() != N || it.theta.size() != N)
        throw DimensionError("iterate subsystem count differs from N");
    const int T = inst.T;
    for (int j = 0; j < inst.N; ++j) {
        if (it.x[j].size() != inst.n(j) * (T + 1) || it.p[j].size() != inst.n(j) * (T + 1) ||
            it.u[j].size() != inst.m(j) * T || it.lambda[j].size() != inst.nu(j) * (T + 1) ||
            it.theta[j].size() != inst.nu(j) * (T + 1))
            throw DimensionError("iterate block of subsystem " + std::to_string(j + 1) + " has wrong size");
    }
}

} // namespace pathcg
