#include <pathcg/ipm.hpp>

#include <pathcg/errors.hpp>
#include <pathcg/kkt.hpp>
#include <pathcg/oracle.hpp>
#include <pathcg/precond.hpp>

#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace pathcg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double max_ratio(const VectorXd &v, const VectorXd &dv) {
    double a = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0)
            a = std::min(a, -v[i] / dv[i]);
    return a;
}

SolveReport direct_report(const ReducedSystem &red, const VectorXd &x, const Exec &exec, double seconds) {
    SolveReport rep;
    rep.iterations = 1;
    rep.converged = true;
    const VectorXd r = red.rhs() - red.matvec(x, exec);
    rep.residual = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
    rep.history = {red.rhs().size() ? red.rhs().cwiseAbs().maxCoeff() : 0.0, rep.residual};
    rep.solve_seconds = seconds;
    return rep;
}

} // namespace

std::string to_string(InnerSolver s) {
    switch (s) {
    case InnerSolver::Pcg:
        return "pcg";
    case InnerSolver::Jacobi:
        return "jacobi";
    case InnerSolver::Direct:
        return "direct";
    case InnerSolver::Dense:
        return "dense";
    case InnerSolver::DenseKkt:
        return "dense-kkt";
    }
    return "?";
}

InnerSolver parse_inner_solver(const std::string &name) {
    if (name == "pcg")
        return InnerSolver::Pcg;
    if (name == "jacobi")
        return InnerSolver::Jacobi;
    if (name == "direct" || name == "direct-ldl")
        return InnerSolver::Direct;
    if (name == "dense")
        return InnerSolver::Dense;
    if (name == "dense-kkt")
        return InnerSolver::DenseKkt;
    throw std::invalid_argument("unknown inner solver '" + name + "'");
}

IpmIterate initialize(const ProblemInstance &inst) {
    IpmIterate it = IpmIterate::zeros(inst);
    for (auto &l : it.lambda)
        l.setOnes();
    for (auto &t : it.theta)
        t.setOnes();
    return it;
}

double duality_gap(const IpmIterate &it) {
    double s = 0.0;
    Eigen::Index count = 0;
    for (std::size_t j = 0; j < it.lambda.size(); ++j) {
        s += it.lambda[j].dot(it.theta[j]);
        count += it.lambda[j].size();
    }
    return count ? s / static_cast<double>(count) : 0.0;
}

double step_size(const IpmIterate &it, const Direction &d, double gamma_ftb) {
    double a = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < it.lambda.size(); ++j) {
        a = std::min(a, max_ratio(it.lambda[j], d.lambda[j]));
        a = std::min(a, max_ratio(it.theta[j], d.theta[j]));
    }
    return std::min(1.0, gamma_ftb * a);
}

double kkt_residual(const ProblemInstance &inst, const IpmIterate &it) {
    const FullKktSystem sys = assemble_full(inst, it, 0.0, Exec::serial());
    double r = 0.0;
    for (const auto &b : sys.rhs)
        for (const VectorXd *v : {&b.x, &b.u, &b.p, &b.lambda})
            if (v->size())
                r = std::max(r, v->cwiseAbs().maxCoeff());
    return r;
}

NewtonResult newton_step(const ProblemInstance &inst, const IpmIterate &it, double sigma_mu, const IpmConfig &cfg) {
    const Exec &exec = cfg.exec;
    NewtonResult out;
    const auto t0 = Clock::now();

    if (cfg.solver == InnerSolver::DenseKkt) {
        const oracle::DenseKkt kkt = oracle::dense_kkt(inst, it, sigma_mu);
        const oracle::Vec sol = oracle::LuFactor(kkt.K).solve(kkt.b);
        out.delta = oracle::dense_kkt_direction(inst, kkt, sol);
        out.inner.iterations = 1;
        out.inner.converged = true;
        oracle::Vec r = kkt.K * sol;
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] -= kkt.b[i];
        out.inner.residual = oracle::norm_inf(r);
        out.inner.history = {oracle::norm_inf(kkt.b), out.inner.residual};
        out.inner.solve_seconds = seconds_since(t0);
        return out;
    }

    const FullKktSystem sys = assemble_full(inst, it, sigma_mu, exec);
    const ReducedSystem red = reduce(sys, exec);
    VectorXd dxp;
    switch (cfg.solver) {
    case InnerSolver::Pcg: {
        const PairedBlocks pairs = build_pairs(red, exec);
        const JacobiPreconditioner pre(pairs, cfg.L);
        const double setup = seconds_since(t0);
        PcgConfig pc;
        pc.eps = cfg.eps_inner;
        pc.iter_max = cfg.inner_iter_max;
        SolveResult res = pcg_solve(PsiOperator(red), pre, red.rhs(), pc, exec);
        dxp = std::move(res.x);
        out.inner = std::move(res.report);
        out.inner.setup_seconds = setup;
        break;
    }
    case InnerSolver::Jacobi: {
        const PairedBlocks pairs = build_pairs(red, exec);
        const double setup = seconds_since(t0);
        SolveResult res = jacobi_solve(PsiOperator(red), pairs, red.rhs(), cfg.eps_inner, cfg.inner_iter_max, exec);
        dxp = std::move(res.x);
        out.inner = std::move(res.report);
        out.inner.setup_seconds = setup;
        break;
    }
    case InnerSolver::Direct: {
        const BlockLdlFactor f = ldl_factor(red.to_blocktri(), PivotKind::Lu);
        dxp = ldl_solve(f, red.rhs());
        out.inner = direct_report(red, dxp, exec, seconds_since(t0));
        break;
    }
    case InnerSolver::Dense: {
        const Eigen::PartialPivLU<MatrixXd> lu(to_dense(red.to_blocktri()));
        dxp = lu.solve(red.rhs());
        out.inner = direct_report(red, dxp, exec, seconds_since(t0));
        break;
    }
    case InnerSolver::DenseKkt:
        break;
    }
    out.delta = recover(red, std::span<const double>(dxp.data(), static_cast<std::size_t>(dxp.size())), exec);
    return out;
}

long IpmResult::max_inner_iterations() const {
    long m = 0;
    for (const auto &s : steps)
        m = std::max(m, s.inner_iterations);
    return m;
}

double IpmResult::avg_inner_iterations() const {
    if (steps.empty())
        return 0.0;
    double s = 0.0;
    for (const auto &st : steps)
        s += static_cast<double>(st.inner_iterations);
    return s / static_cast<double>(steps.size());
}

IpmResult solve(const ProblemInstance &inst, const IpmConfig &cfg) {
    if (!(cfg.sigma > 0.0 && cfg.sigma < 1.0))
        throw std::invalid_argument("sigma must lie in (0, 1)");
    if (!(cfg.gamma_ftb > 0.0 && cfg.gamma_ftb < 1.0))
        throw std::invalid_argument("gamma_ftb must lie in (0, 1)");
    if (cfg.L < 1)
        throw std::invalid_argument("L must be >= 1");
    const auto t0 = Clock::now();

    IpmResult out;
    IpmIterate it = initialize(inst);
    IpmIterate best = it;
    double best_merit = std::numeric_limits<double>::infinity();
    double best_mu = 0.0, best_res = 0.0;

    for (int n = 0;; ++n) {
        const double mu = duality_gap(it);
        const double res = kkt_residual(inst, it);
        const double merit = std::max(mu / cfg.eps_ipm, res / cfg.eps_feas);
        if (merit < best_merit) {
            best_merit = merit;
            best = it;
            best_mu = mu;
            best_res = res;
        }
        if (mu <= cfg.eps_ipm && res <= cfg.eps_feas) {
            out.converged = true;
            break;
        }
        if (n == cfg.max_newton)
            break;

        const auto ts = Clock::now();
        NewtonResult nr = newton_step(inst, it, cfg.sigma * mu, cfg);
        const double alpha = step_size(it, nr.delta, cfg.gamma_ftb);
        it.axpy(alpha, nr.delta);
        for (std::size_t j = 0; j < it.lambda.size(); ++j)
            if ((it.lambda[j].size() && it.lambda[j].minCoeff() <= 0.0) ||
                (it.theta[j].size() && it.theta[j].minCoeff() <= 0.0))
                throw NonInteriorError("step left the interior at Newton step " + std::to_string(n + 1));

        StepRecord rec{n + 1, mu, alpha, res, nr.inner.iterations, nr.inner.converged, seconds_since(ts)};
        out.steps.push_back(rec);
        ++out.newton_steps;
        if (cfg.progress) {
            char line[160];
            std::snprintf(line, sizeof line, "%d\t%.6e\t%.6e\t%ld\t%.6e\n", rec.n, rec.mu, rec.alpha,
                          rec.inner_iterations, rec.residual);
            *cfg.progress << line << std::flush;
        }
    }

    if (out.converged) {
        out.iterate = std::move(it);
        out.mu = duality_gap(out.iterate);
        out.residual = kkt_residual(inst, out.iterate);
    } else {
        out.iterate = std::move(best);
        out.mu = best_mu;
        out.residual = best_res;
    }
    out.cost = evaluate_cost(inst, out.trajectory());
    out.seconds = seconds_since(t0);
    return out;
}

} // namespace pathcg
