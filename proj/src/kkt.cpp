#include <pathcg/kkt.hpp>

#include "small_kernels.hpp"

#include <pathcg/errors.hpp>

#include <algorithm>
#include <array>
#include <string>

namespace pathcg {

namespace {

using ConstSeg = Eigen::Map<const VectorXd>;
using Seg = Eigen::Map<VectorXd>;

std::string at(int j, int t) { return "(" + std::to_string(j + 1) + "," + std::to_string(t) + ")"; }

void check_interior(const VectorXd &v, int j, const char *name) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!(v[i] >= kInteriorFloor))
            throw NonInteriorError(std::string(name) + " of subsystem " + std::to_string(j + 1) +
                                   " is not strictly positive");
}

// Stacked-in-time dense blocks of one subsystem; used only by the dense export.
struct Stacked {
    MatrixXd Q, S, R, A, B, C, D;
};

Stacked stack(const ProblemInstance &inst, int j) {
    const int T = inst.T, n = inst.n(j), m = inst.m(j), nu = inst.nu(j);
    const Eigen::Index nx = n * (T + 1), nuT = m * T, nl = nu * (T + 1);
    Stacked s{MatrixXd::Zero(nx, nx), MatrixXd::Zero(nuT, nx), MatrixXd::Zero(nuT, nuT), MatrixXd::Zero(nx, nx),
              MatrixXd::Zero(nx, nuT), MatrixXd::Zero(nl, nx), MatrixXd::Zero(nl, nuT)};
    s.A.diagonal().setConstant(-1.0);
    for (int t = 0; t <= T; ++t) {
        const auto &st = inst.stage(j, t);
        s.Q.block(t * n, t * n, n, n) = st.Q;
        s.C.block(t * nu, t * n, nu, n) = st.C;
        if (t < T) {
            s.S.block(t * m, t * n, m, n) = st.S;
            s.R.block(t * m, t * m, m, m) = st.R;
            s.D.block(t * nu, t * m, nu, m) = st.D;
            s.A.block((t + 1) * n, t * n, n, n) = st.A;
            s.B.block((t + 1) * n, t * m, n, m) = st.B;
        }
    }
    return s;
}

// E_j (from_prev) or F_j stacked: n_j(T+1) x n_{j-+1}(T+1), block (t+1, t).
MatrixXd stack_coupling(const ProblemInstance &inst, int j, bool from_prev) {
    const int T = inst.T, n = inst.n(j), nc = from_prev ? inst.n_prev(j) : inst.n_next(j);
    MatrixXd M = MatrixXd::Zero(n * (T + 1), nc * (T + 1));
    for (int t = 0; t < T; ++t)
        M.block((t + 1) * n, t * nc, n, nc) = from_prev ? inst.stage(j, t).E : inst.stage(j, t).F;
    return M;
}

void note(ReductionStats &s, const MatrixXd &M) {
    s.largest_rows = std::max(s.largest_rows, M.rows());
    s.largest_cols = std::max(s.largest_cols, M.cols());
}

} // namespace

std::ptrdiff_t FullKktSystem::block_size(int j) const {
    const int T = inst->T;
    return 2 * inst->n(j) * (T + 1) + inst->m(j) * T + 2 * inst->nu(j) * (T + 1);
}

VectorXd eta(const IpmIterate &it, int j, double sigma_mu) {
    const auto &l = it.lambda[static_cast<std::size_t>(j)];
    const auto &th = it.theta[static_cast<std::size_t>(j)];
    return (th.cwiseProduct(l) + l.cwiseProduct(th) - l.cwiseProduct(th)).array() + sigma_mu;
}

FullKktSystem assemble_full(const ProblemInstance &inst, const IpmIterate &it, double sigma_mu, const Exec &exec) {
    check_layout(inst, it);
    const int N = inst.N, T = inst.T;
    FullKktSystem sys;
    sys.inst = &inst;
    sys.sigma_mu = sigma_mu;
    sys.lambda = it.lambda;
    sys.theta = it.theta;
    sys.rhs.resize(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) {
        check_interior(it.lambda[j], j, "lambda");
        check_interior(it.theta[j], j, "theta");
    }

    parallel_for(exec, N, [&](std::ptrdiff_t jj) {
        const int j = static_cast<int>(jj);
        const int n = inst.n(j), m = inst.m(j), nu = inst.nu(j);
        const auto &x = it.x[j], &u = it.u[j], &p = it.p[j], &lam = it.lambda[j], &th = it.theta[j];
        auto X = [&](int t) { return x.segment(t * n, n); };
        auto U = [&](int t) { return u.segment(t * m, m); };
        auto P = [&](int t) { return p.segment(t * n, n); };

        KktRhs b;
        b.x.resize(n * (T + 1));
        b.u.resize(m * T);
        b.p.resize(n * (T + 1));
        b.lambda.resize(nu * (T + 1));
        const VectorXd e = eta(it, j, sigma_mu);
        b.theta = e - th.cwiseProduct(lam) - lam.cwiseProduct(th);

        for (int t = 0; t <= T; ++t) {
            const auto &st = inst.stage(j, t);
            const auto L = lam.segment(t * nu, nu);
            VectorXd gx = st.Q * X(t) + st.C.transpose() * L - P(t);
            VectorXd cx = st.C * X(t);
            if (t < T) {
                gx += st.S.transpose() * U(t) + st.A.transpose() * P(t + 1);
                if (j > 0)
                    gx += inst.stage(j - 1, t).F.transpose() * it.p[j - 1].segment((t + 1) * inst.n(j - 1), inst.n(j - 1));
                if (j + 1 < N)
                    gx += inst.stage(j + 1, t).E.transpose() * it.p[j + 1].segment((t + 1) * inst.n(j + 1), inst.n(j + 1));
                b.u.segment(t * m, m) =
                    -(st.S * X(t) + st.R * U(t) + st.B.transpose() * P(t + 1) + st.D.transpose() * L);
                cx += st.D * U(t);

                const VectorXd &xprev = j > 0 ? it.x[j - 1].segment(t * inst.n(j - 1), inst.n(j - 1)).eval()
                                              : inst.chi[static_cast<std::size_t>(t)];
                const VectorXd &xnext = j + 1 < N ? it.x[j + 1].segment(t * inst.n(j + 1), inst.n(j + 1)).eval()
                                                  : inst.zeta[static_cast<std::size_t>(t)];
                b.p.segment((t + 1) * n, n) = X(t + 1) - st.A * X(t) - st.B * U(t) - st.E * xprev - st.F * xnext;
            }
            b.x.segment(t * n, n) = -gx;
            b.lambda.segment(t * nu, nu) = st.kappa - cx - th.segment(t * nu, nu);
        }
        b.p.head(n) = X(0) - inst.xi[static_cast<std::size_t>(j)];
        sys.rhs[static_cast<std::size_t>(j)] = std::move(b);
    });
    return sys;
}

BlockTriDiag FullKktSystem::to_blocktri() const {
    const int N = inst->N, T = inst->T;
    std::vector<MatrixXd> diag, lower;
    std::vector<std::array<Eigen::Index, 5>> off;
    for (int j = 0; j < N; ++j) {
        const Eigen::Index nx = inst->n(j) * (T + 1), nuT = inst->m(j) * T, nl = inst->nu(j) * (T + 1);
        off.push_back({0, nx, nx + nuT, 2 * nx + nuT, 2 * nx + nuT + nl});
        const Stacked s = stack(*inst, j);
        const auto &o = off.back();
        MatrixXd Phi = MatrixXd::Zero(block_size(j), block_size(j));
        Phi.block(o[0], o[0], nx, nx) = s.Q;
        Phi.block(o[0], o[1], nx, nuT) = s.S.transpose();
        Phi.block(o[0], o[2], nx, nx) = s.A.transpose();
        Phi.block(o[0], o[3], nx, nl) = s.C.transpose();
        Phi.block(o[1], o[0], nuT, nx) = s.S;
        Phi.block(o[1], o[1], nuT, nuT) = s.R;
        Phi.block(o[1], o[2], nuT, nx) = s.B.transpose();
        Phi.block(o[1], o[3], nuT, nl) = s.D.transpose();
        Phi.block(o[2], o[0], nx, nx) = s.A;
        Phi.block(o[2], o[1], nx, nuT) = s.B;
        Phi.block(o[3], o[0], nl, nx) = s.C;
        Phi.block(o[3], o[1], nl, nuT) = s.D;
        Phi.block(o[3], o[4], nl, nl).setIdentity();
        Phi.block(o[4], o[3], nl, nl) = theta[j].asDiagonal();
        Phi.block(o[4], o[4], nl, nl) = lambda[j].asDiagonal();
        diag.push_back(std::move(Phi));

        if (j == 0) {
            lower.emplace_back();
            continue;
        }
        const auto &op = off[j - 1];
        const Eigen::Index nxp = inst->n(j - 1) * (T + 1);
        MatrixXd Om = MatrixXd::Zero(block_size(j), block_size(j - 1));
        Om.block(o[0], op[2], nx, nxp) = stack_coupling(*inst, j - 1, false).transpose();
        Om.block(o[2], op[0], nx, nxp) = stack_coupling(*inst, j, true);
        lower.push_back(std::move(Om));
    }
    return {std::move(diag), std::move(lower)};
}

VectorXd FullKktSystem::stacked_rhs() const {
    std::ptrdiff_t total = 0;
    for (int j = 0; j < inst->N; ++j)
        total += block_size(j);
    VectorXd b(total);
    std::ptrdiff_t o = 0;
    for (const auto &r : rhs)
        for (const VectorXd *v : {&r.x, &r.u, &r.p, &r.lambda, &r.theta}) {
            b.segment(o, v->size()) = *v;
            o += v->size();
        }
    return b;
}

ReducedSystem reduce(const FullKktSystem &sys, const Exec &exec) {
    const ProblemInstance &inst = *sys.inst;
    const int N = inst.N, T = inst.T;
    ReducedSystem red;
    red.inst_ = &inst;
    red.subs_.resize(static_cast<std::size_t>(N));
    red.offsets_.assign(1, 0);
    for (int j = 0; j < N; ++j)
        red.offsets_.push_back(red.offsets_.back() + 2 * static_cast<std::ptrdiff_t>(inst.n(j)) * (T + 1));
    red.rhs_.resize(red.offsets_.back());
    std::vector<ReductionStats> stats(static_cast<std::size_t>(N));

    parallel_for(exec, N, [&](std::ptrdiff_t jj) {
        const int j = static_cast<int>(jj);
        const int n = inst.n(j), m = inst.m(j), nu = inst.nu(j);
        const KktRhs &b = sys.rhs[j];
        ReducedSubsystem &s = red.subs_[j];
        ReductionStats &st = stats[j];
        s.n = n;
        s.m = m;
        s.nu = nu;
        s.lambda = sys.lambda[j];
        s.theta = sys.theta[j];
        check_interior(s.lambda, j, "lambda");
        check_interior(s.theta, j, "theta");
        s.w = s.lambda.cwiseQuotient(s.theta);
        s.b_lambda = b.lambda;
        s.b_theta = b.theta;
        const VectorXd g = s.w.cwiseProduct(b.lambda) - b.theta.cwiseQuotient(s.theta);

        s.Qt.resize(T + 1);
        s.Rt.resize(T + 1);
        s.At.resize(T);
        s.Rhat.resize(T);
        s.Shat.resize(T);
        s.bu_hat.resize(m * T);
        s.Rt[0] = MatrixXd::Zero(n, n);

        Seg bx(red.rhs_.data() + red.x_index(j, 0), n * (T + 1));
        Seg bp(red.rhs_.data() + red.p_index(j, 0), n * (T + 1));
        bp.head(n) = b.p.head(n);

        for (int t = 0; t <= T; ++t) {
            const auto &sd = inst.stage(j, t);
            const auto w = s.w.segment(t * nu, nu);
            const auto gt = g.segment(t * nu, nu);
            const MatrixXd WC = w.asDiagonal() * sd.C;
            MatrixXd Qhat = sd.Q + sd.C.transpose() * WC;
            VectorXd bx_hat = b.x.segment(t * n, n) + sd.C.transpose() * gt;
            note(st, Qhat);
            st.products += 2;
            if (t == T) {
                s.Qt[T] = 0.5 * (Qhat + Qhat.transpose());
                bx.segment(T * n, n) = bx_hat;
                break;
            }
            const MatrixXd WD = w.asDiagonal() * sd.D;
            MatrixXd Rhat = sd.R + sd.D.transpose() * WD;
            s.Shat[t] = sd.S + sd.D.transpose() * WC;
            s.bu_hat.segment(t * m, m) = b.u.segment(t * m, m) + sd.D.transpose() * gt;
            note(st, Rhat);
            note(st, s.Shat[t]);
            st.products += 3;

            s.Rhat[t].compute(Rhat);
            if (m > 0 && (s.Rhat[t].info() != Eigen::Success || s.Rhat[t].rcond() < kPivotRcondFloor))
                throw NonInteriorError("input Hessian not positive definite at " + at(j, t));
            const MatrixXd RinvS = s.Rhat[t].solve(s.Shat[t]);
            const MatrixXd RinvBt = s.Rhat[t].solve(sd.B.transpose());
            const VectorXd Rinvbu = s.Rhat[t].solve(s.bu_hat.segment(t * m, m));
            MatrixXd Qt = Qhat - s.Shat[t].transpose() * RinvS;
            s.Qt[t] = 0.5 * (Qt + Qt.transpose());
            s.At[t] = sd.A - sd.B * RinvS;
            MatrixXd Rt = -sd.B * RinvBt;
            s.Rt[t + 1] = 0.5 * (Rt + Rt.transpose());
            bx.segment(t * n, n) = bx_hat - s.Shat[t].transpose() * Rinvbu;
            bp.segment((t + 1) * n, n) = b.p.segment((t + 1) * n, n) - sd.B * Rinvbu;
            note(st, RinvS);
            note(st, RinvBt);
            st.products += 7;
        }
    });

    for (const auto &s : stats) {
        red.stats_.largest_rows = std::max(red.stats_.largest_rows, s.largest_rows);
        red.stats_.largest_cols = std::max(red.stats_.largest_cols, s.largest_cols);
        red.stats_.products += s.products;
    }

    // Blocks read by matvec, per subsystem in the order it reads them.
    red.packed_.resize(static_cast<std::size_t>(N));
    parallel_for(exec, N, [&](std::ptrdiff_t jj) {
        const int j = static_cast<int>(jj);
        const ReducedSubsystem &s = red.subs_[j];
        auto &buf = red.packed_[j];
        auto put = [&](const MatrixXd &A) { buf.insert(buf.end(), A.data(), A.data() + A.size()); };
        for (int t = 0; t <= T; ++t) {
            put(s.Qt[t]);
            if (t < T) {
                put(s.At[t]);
                if (j > 0)
                    put(inst.stage(j - 1, t).F);
                if (j + 1 < N)
                    put(inst.stage(j + 1, t).E);
            }
            if (t > 0) {
                put(s.Rt[t]);
                put(s.At[t - 1]);
                if (j > 0)
                    put(inst.stage(j, t - 1).E);
                if (j + 1 < N)
                    put(inst.stage(j, t - 1).F);
            }
        }
    });
    return red;
}

void ReducedSystem::matvec(const Exec &exec, std::span<const double> in, std::span<double> out) const {
    if (static_cast<std::ptrdiff_t>(in.size()) != dim() || static_cast<std::ptrdiff_t>(out.size()) != dim())
        throw DimensionError("reduced matvec: vector length differs from system dimension");
    const int N = this->N(), T = this->T();
    parallel_for(exec, N, [&](std::ptrdiff_t jj) {
        const int j = static_cast<int>(jj);
        const Eigen::Index n = sub(j).n;
        const Eigen::Index nl = j > 0 ? sub(j - 1).n : 0, nr = j + 1 < N ? sub(j + 1).n : 0;
        const double *blk = packed_[j].data();
        auto acc = [&](Eigen::Index rows, Eigen::Index cols, bool trans, std::ptrdiff_t from, double *y) {
            detail::small_gemv(blk, rows, cols, trans, in.data() + from, y);
            blk += rows * cols;
        };
        for (int t = 0; t <= T; ++t) {
            double *yx = out.data() + x_index(j, t);
            double *yp = out.data() + p_index(j, t);
            const double *vx = in.data() + x_index(j, t);
            const double *vp = in.data() + p_index(j, t);
            for (Eigen::Index i = 0; i < n; ++i) {
                yx[i] = -vp[i];
                yp[i] = -vx[i];
            }
            acc(n, n, false, x_index(j, t), yx); // Q~
            if (t < T) {
                acc(n, n, true, p_index(j, t + 1), yx); // A~'
                if (j > 0)
                    acc(nl, n, true, p_index(j - 1, t + 1), yx); // F_{j-1}'
                if (j + 1 < N)
                    acc(nr, n, true, p_index(j + 1, t + 1), yx); // E_{j+1}'
            }
            if (t > 0) {
                acc(n, n, false, p_index(j, t), yp);     // R~
                acc(n, n, false, x_index(j, t - 1), yp); // A~
                if (j > 0)
                    acc(n, nl, false, x_index(j - 1, t - 1), yp); // E_j
                if (j + 1 < N)
                    acc(n, nr, false, x_index(j + 1, t - 1), yp); // F_j
            }
        }
    });
}

VectorXd ReducedSystem::matvec(const VectorXd &v, const Exec &exec) const {
    VectorXd out(dim());
    matvec(exec, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())),
           std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
    return out;
}

BlockTriDiag ReducedSystem::to_blocktri() const {
    const int N = this->N(), T = this->T();
    std::vector<MatrixXd> diag, lower;
    for (int j = 0; j < N; ++j) {
        const ReducedSubsystem &s = sub(j);
        const int n = s.n;
        const Eigen::Index nx = n * (T + 1);
        MatrixXd Phi = MatrixXd::Zero(2 * nx, 2 * nx);
        for (int t = 0; t <= T; ++t) {
            Phi.block(t * n, t * n, n, n) = s.Qt[t];
            Phi.block(nx + t * n, nx + t * n, n, n) = s.Rt[t];
            Phi.block(nx + t * n, t * n, n, n) = -MatrixXd::Identity(n, n);
            if (t < T)
                Phi.block(nx + (t + 1) * n, t * n, n, n) = s.At[t];
        }
        Phi.topRightCorner(nx, nx) = Phi.bottomLeftCorner(nx, nx).transpose();
        diag.push_back(std::move(Phi));
        if (j == 0) {
            lower.emplace_back();
            continue;
        }
        const Eigen::Index nxp = sub(j - 1).n * (T + 1);
        MatrixXd Om = MatrixXd::Zero(2 * nx, 2 * nxp);
        Om.block(0, nxp, nx, nxp) = stack_coupling(*inst_, j - 1, false).transpose();
        Om.block(nx, 0, nx, nxp) = stack_coupling(*inst_, j, true);
        lower.push_back(std::move(Om));
    }
    return {std::move(diag), std::move(lower)};
}

Direction recover(const ReducedSystem &red, std::span<const double> delta_xp, const Exec &exec) {
    if (static_cast<std::ptrdiff_t>(delta_xp.size()) != red.dim())
        throw DimensionError("recover: reduced solution has wrong length");
    const ProblemInstance &inst = red.instance();
    const int N = red.N(), T = red.T();
    Direction d = Direction::zeros(inst);
    parallel_for(exec, N, [&](std::ptrdiff_t jj) {
        const int j = static_cast<int>(jj);
        const ReducedSubsystem &s = red.sub(j);
        const int n = s.n, m = s.m, nu = s.nu;
        d.x[j] = ConstSeg(delta_xp.data() + red.x_index(j, 0), n * (T + 1));
        d.p[j] = ConstSeg(delta_xp.data() + red.p_index(j, 0), n * (T + 1));
        for (int t = 0; t <= T; ++t) {
            const auto &sd = inst.stage(j, t);
            const auto dx = d.x[j].segment(t * n, n);
            VectorXd r = sd.C * dx;
            if (t < T) {
                auto du = d.u[j].segment(t * m, m);
                if (m > 0)
                    du = s.Rhat[t].solve(s.bu_hat.segment(t * m, m) - s.Shat[t] * dx -
                                         sd.B.transpose() * d.p[j].segment((t + 1) * n, n));
                r += sd.D * du;
            }
            const auto w = s.w.segment(t * nu, nu);
            const auto th = s.theta.segment(t * nu, nu);
            const auto bl = s.b_lambda.segment(t * nu, nu);
            const auto bt = s.b_theta.segment(t * nu, nu);
            d.lambda[j].segment(t * nu, nu) = w.cwiseProduct(r - bl) + bt.cwiseQuotient(th);
        }
        d.theta[j] = (s.b_theta - s.theta.cwiseProduct(d.lambda[j])).cwiseQuotient(s.lambda);
    });
    return d;
}

} // namespace pathcg
