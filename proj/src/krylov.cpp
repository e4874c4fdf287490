#include <pathcg/krylov.hpp>

#include <pathcg/errors.hpp>

#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

namespace pathcg {

namespace {

std::span<const double> cspan(const VectorXd &v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<double> span(VectorXd &v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

constexpr double kCurvatureFloor = 1e-300;

// r = rhs - Psi x
void true_residual(const PsiOperator &op, const Exec &exec, const VectorXd &rhs, const VectorXd &x, VectorXd &r) {
    op.apply(exec, cspan(x), span(r));
    xpby(exec, cspan(rhs), -1.0, span(r));
}

} // namespace

void PsiOperator::apply(const Exec &exec, std::span<const double> in, std::span<double> out) const {
    // per-thread buffer, see JacobiPreconditioner::apply
    thread_local std::vector<double> tmp;
    const auto n = static_cast<std::size_t>(dim());
    if (tmp.size() < n)
        tmp.resize(n);
    red_->matvec(exec, in, {tmp.data(), n});
    red_->matvec(exec, {tmp.data(), n}, out);
}

VectorXd PsiOperator::apply(const VectorXd &v, const Exec &exec) const {
    VectorXd out(dim());
    apply(exec, cspan(v), span(out));
    return out;
}

VectorXd PsiOperator::squared_rhs(const VectorXd &b, const Exec &exec) const { return red_->matvec(b, exec); }

long default_iter_max(const ReducedSystem &red) { return 10L * red.N() * red.T(); }

SolveResult pcg_solve(const PsiOperator &op, const Preconditioner &pre, const VectorXd &b, const PcgConfig &cfg,
                      const Exec &exec) {
    if (b.size() != op.dim())
        throw DimensionError("pcg: right-hand side length differs from system dimension");
    if (!(cfg.eps > 0.0))
        throw std::invalid_argument("pcg: eps must be positive");
    const auto t0 = std::chrono::steady_clock::now();
    const long iter_max = cfg.iter_max > 0 ? cfg.iter_max : default_iter_max(op.reduced());
    const Eigen::Index n = op.dim();

    SolveResult out;
    SolveReport &rep = out.report;
    const VectorXd rhs = op.squared_rhs(b, exec);
    VectorXd x = VectorXd::Zero(n), r = rhs, q(n), d(n), y(n);

    double res = norm_inf(exec, cspan(r));
    rep.history.push_back(res);
    VectorXd best = x;
    double best_res = res;
    if (res < cfg.eps) {
        rep.converged = true;
        rep.residual = res;
        out.x = std::move(x);
        rep.solve_seconds = seconds_since(t0);
        return out;
    }

    pre.apply(exec, cspan(r), span(q));
    d = q;
    double beta = dot(exec, cspan(r), cspan(q));
    for (long i = 1; i <= iter_max; ++i) {
        op.apply(exec, cspan(d), span(y));
        const double curv = dot(exec, cspan(y), cspan(d));
        if (!(curv > kCurvatureFloor)) {
            rep.breakdown = true;
            break;
        }
        const double alpha = beta / curv;
        axpy(exec, alpha, cspan(d), span(x));
        axpy(exec, -alpha, cspan(y), span(r));
        if (cfg.recompute_every > 0 && i % cfg.recompute_every == 0)
            true_residual(op, exec, rhs, x, r);
        res = norm_inf(exec, cspan(r));
        rep.iterations = i;
        rep.history.push_back(res);
        if (res < cfg.eps) {
            // confirm against the true residual before stopping
            true_residual(op, exec, rhs, x, r);
            res = norm_inf(exec, cspan(r));
            if (res < cfg.eps) {
                rep.converged = true;
                best = x;
                best_res = res;
                break;
            }
        }
        if (res < best_res) {
            best = x;
            best_res = res;
        }
        pre.apply(exec, cspan(r), span(q));
        const double beta_new = dot(exec, cspan(r), cspan(q));
        xpby(exec, cspan(q), beta_new / beta, span(d));
        beta = beta_new;
    }

    if (!rep.converged) {
        true_residual(op, exec, rhs, best, r);
        best_res = norm_inf(exec, cspan(r));
    }
    rep.residual = best_res;
    out.x = std::move(best);
    if (!cfg.keep_history)
        rep.history = {rep.history.front(), rep.history.back()};
    rep.solve_seconds = seconds_since(t0);
    return out;
}

SolveResult jacobi_solve(const PsiOperator &op, const PairedBlocks &pairs, const VectorXd &b, double eps,
                         long iter_max, const Exec &exec) {
    if (b.size() != op.dim())
        throw DimensionError("jacobi: right-hand side length differs from system dimension");
    if (!(eps > 0.0))
        throw std::invalid_argument("jacobi: eps must be positive");
    const auto t0 = std::chrono::steady_clock::now();
    if (iter_max <= 0)
        iter_max = default_iter_max(op.reduced());
    const PairLayout &lay = pairs.layout();
    const Eigen::Index n = op.dim();

    SolveResult out;
    SolveReport &rep = out.report;
    const VectorXd rhs = op.squared_rhs(b, exec);
    VectorXd x = VectorXd::Zero(n), r = rhs, rp(n), zp(n), z(n);
    double res = norm_inf(exec, cspan(r));
    rep.history.push_back(res);
    VectorXd best = x;
    double best_res = res;

    for (long i = 1; i <= iter_max && res >= eps; ++i) {
        lay.gather(exec, cspan(r), span(rp));
        pairs.delta_solve(exec, cspan(rp), span(zp));
        lay.scatter(exec, cspan(zp), span(z));
        axpy(exec, 1.0, cspan(z), span(x));
        true_residual(op, exec, rhs, x, r);
        res = norm_inf(exec, cspan(r));
        rep.iterations = i;
        rep.history.push_back(res);
        if (res < best_res) {
            best = x;
            best_res = res;
        }
        if (!std::isfinite(res))
            break;
    }
    rep.converged = best_res < eps;
    rep.residual = best_res;
    out.x = std::move(best);
    rep.solve_seconds = seconds_since(t0);
    return out;
}

double cg_error_bound(double kappa, long i) {
    if (!(kappa >= 1.0))
        throw std::invalid_argument("cg_error_bound: kappa must be >= 1");
    if (i < 0)
        throw std::invalid_argument("cg_error_bound: iteration index must be >= 0");
    const double s = std::sqrt(kappa);
    return 2.0 * std::pow((s - 1.0) / (s + 1.0), static_cast<double>(i));
}

} // namespace pathcg
