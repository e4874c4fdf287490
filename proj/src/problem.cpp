#include <pathcg/problem.hpp>

#include <pathcg/errors.hpp>
#include <pathcg/rng.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pathcg {

std::int64_t ProblemInstance::variable_count() const {
    std::int64_t total = 0;
    for (const auto &s : subsystems)
        total += static_cast<std::int64_t>(s.n) * (T + 1) + static_cast<std::int64_t>(s.m) * T;
    return total;
}

std::int64_t ProblemInstance::constraint_count() const {
    std::int64_t total = 0;
    for (const auto &s : subsystems)
        total += static_cast<std::int64_t>(s.nu) * (T + 1);
    return total;
}

Trajectory Trajectory::zeros(const ProblemInstance &inst) {
    Trajectory traj;
    for (int j = 0; j < inst.N; ++j) {
        traj.x.push_back(VectorXd::Zero(inst.n(j) * (inst.T + 1)));
        traj.u.push_back(VectorXd::Zero(inst.m(j) * inst.T));
    }
    return traj;
}

namespace {

std::string at(int j, int t) {
    std::ostringstream os;
    os << " at (" << j + 1 << "," << t << ")";
    return os.str();
}

bool has_shape(const MatrixXd &M, Eigen::Index r, Eigen::Index c) { return M.rows() == r && M.cols() == c; }

double max_abs(const MatrixXd &M) { return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff(); }

bool is_symmetric(const MatrixXd &M, double tol) {
    return max_abs(M - M.transpose()) <= tol * std::max(1.0, max_abs(M));
}

/// Eigenvalue extremes of the symmetric part.
std::pair<double, double> eig_range(const MatrixXd &M) {
    if (M.size() == 0)
        return {0.0, 0.0};
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    const auto &ev = es.eigenvalues();
    return {ev.minCoeff(), ev.cwiseAbs().maxCoeff()};
}

bool is_psd(const MatrixXd &M, double tol) {
    auto [lo, big] = eig_range(M);
    return lo >= -tol * big;
}

bool is_pd(const MatrixXd &M, double tol) {
    auto [lo, big] = eig_range(M);
    return big > 0.0 && lo > tol * big;
}

} // namespace

std::vector<Violation> validate(const ProblemInstance &inst, double tol_psd) {
    std::vector<Violation> out;
    auto fail = [&](int j, int t, std::string what) {
        if (j >= 0)
            what += at(j, t);
        out.push_back({j, t, std::move(what)});
    };

    if (inst.N < 1)
        fail(-1, -1, "N must be at least 1");
    if (inst.T < 1)
        fail(-1, -1, "T must be at least 1");
    if (static_cast<int>(inst.subsystems.size()) != inst.N) {
        fail(-1, -1, "subsystem count differs from N");
        return out;
    }
    if (static_cast<int>(inst.xi.size()) != inst.N)
        fail(-1, -1, "xi must hold one initial state per subsystem");
    if (static_cast<int>(inst.chi.size()) != inst.T + 1 || static_cast<int>(inst.zeta.size()) != inst.T + 1)
        fail(-1, -1, "chi and zeta must hold T+1 boundary states");
    for (const auto &v : inst.chi)
        if (v.size() != inst.n_left)
            fail(-1, -1, "chi entry has wrong size");
    for (const auto &v : inst.zeta)
        if (v.size() != inst.n_right)
            fail(-1, -1, "zeta entry has wrong size");
    if (!out.empty() && (inst.N < 1 || inst.T < 1))
        return out;

    for (int j = 0; j < inst.N; ++j) {
        const auto &s = inst.sub(j);
        const int n = s.n, m = s.m, nu = s.nu;
        if (n < 1 || m < 0 || nu < 0) {
            fail(j, -1, "invalid subsystem dimensions");
            continue;
        }
        if (j < static_cast<int>(inst.xi.size()) && inst.xi[j].size() != n)
            fail(j, 0, "xi has wrong size");
        if (static_cast<int>(s.stages.size()) != inst.T + 1) {
            fail(j, -1, "stage count differs from T+1");
            continue;
        }
        for (int t = 0; t <= inst.T; ++t) {
            const auto &st = inst.stage(j, t);
            const bool terminal = t == inst.T;
            bool shapes = has_shape(st.Q, n, n) && has_shape(st.S, m, n) && has_shape(st.R, m, m) &&
                          has_shape(st.C, nu, n) && has_shape(st.D, nu, m) && st.kappa.size() == nu;
            if (!terminal)
                shapes = shapes && has_shape(st.A, n, n) && has_shape(st.B, n, m) &&
                         has_shape(st.E, n, inst.n_prev(j)) && has_shape(st.F, n, inst.n_next(j));
            if (!shapes) {
                fail(j, t, "stage matrix dimensions inconsistent");
                continue;
            }
            if (!is_symmetric(st.Q, tol_psd))
                fail(j, t, "Q not symmetric");
            else if (!is_psd(st.Q, tol_psd))
                fail(j, t, "Q not PSD");
            if (terminal) {
                if (max_abs(st.S) > 0.0)
                    fail(j, t, "S must vanish at the terminal stage");
                if (max_abs(st.R) > 0.0)
                    fail(j, t, "R must vanish at the terminal stage");
                if (max_abs(st.D) > 0.0)
                    fail(j, t, "D must vanish at the terminal stage");
                continue;
            }
            if (!is_symmetric(st.R, tol_psd)) {
                fail(j, t, "R not symmetric");
                continue;
            }
            if (!is_pd(st.R, tol_psd)) {
                fail(j, t, "R not positive definite");
                continue;
            }
            const MatrixXd schur = st.Q - st.S.transpose() * st.R.ldlt().solve(st.S);
            if (!is_psd(schur, tol_psd))
                fail(j, t, "Q - S'R^{-1}S not PSD");
        }
    }
    return out;
}

ProblemInstance msd_chain(int N, int T, std::uint64_t seed, const MsdChainConfig &cfg) {
    if (N < 1 || T < 1)
        throw DimensionError("msd_chain requires N >= 1 and T >= 1");
    if (!(cfg.h > 0.0))
        throw DimensionError("msd_chain requires a positive step h");

    enum : std::uint64_t { kMass = 0, kSpring = 1, kDamper = 2, kInitial = 3 };

    ProblemInstance inst;
    inst.N = N;
    inst.T = T;
    inst.n_left = 2;
    inst.n_right = 2;
    inst.chi.assign(T + 1, VectorXd::Zero(2));
    inst.zeta.assign(T + 1, VectorXd::Zero(2));

    const double h = cfg.h;
    for (int j = 0; j < N; ++j) {
        const auto stream = static_cast<std::uint64_t>(j);
        const double mass = StreamRng(seed, stream, kMass).uniform(cfg.param_lo, cfg.param_hi);
        const double spring = StreamRng(seed, stream, kSpring).uniform(cfg.param_lo, cfg.param_hi);
        const double damper = StreamRng(seed, stream, kDamper).uniform(cfg.param_lo, cfg.param_hi);
        StreamRng init(seed, stream, kInitial);
        VectorXd xi(2);
        xi(0) = init.uniform(cfg.xi_lo, cfg.xi_hi);
        xi(1) = init.uniform(cfg.xi_lo, cfg.xi_hi);
        inst.xi.push_back(xi);

        // m q'' = -k (2q - q_prev - q_next) - c (2v - v_prev - v_next) + u
        MatrixXd A(2, 2), B(2, 1), coupling(2, 2);
        A << 1.0, h, -2.0 * h * spring / mass, 1.0 - 2.0 * h * damper / mass;
        B << 0.0, h / mass;
        coupling << 0.0, 0.0, h * spring / mass, h * damper / mass;

        MatrixXd C(4, 2), D(4, 1);
        C << 1, 0, -1, 0, 0, 0, 0, 0;
        D << 0, 0, 1, -1;
        VectorXd kappa(4);
        kappa << cfg.x_max, cfg.x_max, cfg.u_max, cfg.u_max;

        Subsystem sub;
        sub.n = 2;
        sub.m = 1;
        sub.nu = 4;
        for (int t = 0; t <= T; ++t) {
            StageData st;
            st.Q = Eigen::Vector2d(1.0, 0.0).asDiagonal();
            st.S = MatrixXd::Zero(1, 2);
            st.C = C;
            st.kappa = kappa;
            if (t < T) {
                st.R = MatrixXd::Identity(1, 1);
                st.A = A;
                st.B = B;
                st.E = coupling;
                st.F = coupling;
                st.D = D;
            } else {
                st.R = MatrixXd::Zero(1, 1);
                st.D = MatrixXd::Zero(4, 1);
            }
            sub.stages.push_back(std::move(st));
        }
        inst.subsystems.push_back(std::move(sub));
    }
    return inst;
}

namespace {

MatrixXd random_matrix(StreamRng &rng, int r, int c, double scale) {
    MatrixXd M(r, c);
    for (int i = 0; i < r; ++i)
        for (int k = 0; k < c; ++k)
            M(i, k) = scale * rng.uniform(-1.0, 1.0);
    return M;
}

VectorXd random_vector(StreamRng &rng, int n, double lo, double hi) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i)
        v(i) = rng.uniform(lo, hi);
    return v;
}

} // namespace

ProblemInstance random_instance(const RandomInstanceConfig &cfg, std::uint64_t seed) {
    if (cfg.N < 1 || cfg.T < 1)
        throw DimensionError("random_instance requires N >= 1 and T >= 1");
    StreamRng dims(seed, 0xD1D1);
    auto pick = [&](int hi) { return cfg.heterogeneous ? dims.integer(1, hi) : hi; };

    ProblemInstance inst;
    inst.N = cfg.N;
    inst.T = cfg.T;
    inst.n_left = pick(cfg.n_max);
    inst.n_right = pick(cfg.n_max);
    inst.subsystems.resize(cfg.N);
    for (auto &s : inst.subsystems) {
        s.n = pick(cfg.n_max);
        s.m = pick(cfg.m_max);
        s.nu = pick(cfg.nu_max);
    }

    StreamRng bnd(seed, 0xB0B0);
    for (int t = 0; t <= cfg.T; ++t) {
        inst.chi.push_back(random_vector(bnd, inst.n_left, -0.5, 0.5));
        inst.zeta.push_back(random_vector(bnd, inst.n_right, -0.5, 0.5));
    }

    for (int j = 0; j < cfg.N; ++j) {
        auto &s = inst.subsystems[j];
        StreamRng rng(seed, 1000 + static_cast<std::uint64_t>(j));
        inst.xi.push_back(random_vector(rng, s.n, -1.0, 1.0));
        for (int t = 0; t <= cfg.T; ++t) {
            StageData st;
            const bool terminal = t == cfg.T;
            const int k = terminal ? s.n : s.n + s.m;
            const MatrixXd G = random_matrix(rng, k, k, 1.0);
            const MatrixXd H = G.transpose() * G / k + 0.1 * MatrixXd::Identity(k, k);
            st.Q = H.topLeftCorner(s.n, s.n);
            if (terminal) {
                st.S = MatrixXd::Zero(s.m, s.n);
                st.R = MatrixXd::Zero(s.m, s.m);
                st.D = MatrixXd::Zero(s.nu, s.m);
            } else {
                st.S = H.bottomLeftCorner(s.m, s.n);
                st.R = H.bottomRightCorner(s.m, s.m);
                st.A = MatrixXd::Identity(s.n, s.n) * 0.9 + random_matrix(rng, s.n, s.n, 0.3);
                st.B = random_matrix(rng, s.n, s.m, 1.0);
                st.E = random_matrix(rng, s.n, inst.n_prev(j), cfg.coupling);
                st.F = random_matrix(rng, s.n, inst.n_next(j), cfg.coupling);
                st.D = random_matrix(rng, s.nu, s.m, 1.0);
            }
            st.C = random_matrix(rng, s.nu, s.n, 1.0);
            st.kappa = random_vector(rng, s.nu, 0.5 * cfg.kappa, cfg.kappa);
            s.stages.push_back(std::move(st));
        }
    }
    return inst;
}

ProblemInstance reflect(const ProblemInstance &inst) {
    ProblemInstance out = inst;
    std::reverse(out.subsystems.begin(), out.subsystems.end());
    std::reverse(out.xi.begin(), out.xi.end());
    std::swap(out.n_left, out.n_right);
    std::swap(out.chi, out.zeta);
    for (auto &s : out.subsystems)
        for (auto &st : s.stages)
            std::swap(st.E, st.F);
    return out;
}

namespace {

void check_traj(const ProblemInstance &inst, const Trajectory &traj) {
    if (static_cast<int>(traj.x.size()) != inst.N || static_cast<int>(traj.u.size()) != inst.N)
        throw DimensionError("trajectory subsystem count differs from N");
    for (int j = 0; j < inst.N; ++j)
        if (traj.x[j].size() != inst.n(j) * (inst.T + 1) || traj.u[j].size() != inst.m(j) * inst.T)
            throw DimensionError("trajectory block has wrong size");
}

} // namespace

double evaluate_cost(const ProblemInstance &inst, const Trajectory &traj) {
    check_traj(inst, traj);
    double total = 0.0;
    for (int j = 0; j < inst.N; ++j) {
        const int n = inst.n(j), m = inst.m(j);
        for (int t = 0; t <= inst.T; ++t) {
            const auto &st = inst.stage(j, t);
            const auto x = traj.x[j].segment(t * n, n);
            total += x.dot(st.Q * x);
            if (t < inst.T) {
                const auto u = traj.u[j].segment(t * m, m);
                total += 2.0 * u.dot(st.S * x) + u.dot(st.R * u);
            }
        }
    }
    return 0.5 * total;
}

ResidualReport residuals(const ProblemInstance &inst, const Trajectory &traj,
                         const std::vector<VectorXd> *slacks) {
    check_traj(inst, traj);
    if (slacks && static_cast<int>(slacks->size()) != inst.N)
        throw DimensionError("slack subsystem count differs from N");
    const int T = inst.T;
    ResidualReport rep;
    for (int j = 0; j < inst.N; ++j) {
        const int n = inst.n(j), m = inst.m(j), nu = inst.nu(j);
        const int np = inst.n_prev(j), nn = inst.n_next(j);
        VectorXd dyn(n * (T + 1)), con(nu * (T + 1)), slk;
        if (slacks) {
            if ((*slacks)[j].size() != nu * (T + 1))
                throw DimensionError("slack block has wrong size");
            slk.resize(nu * (T + 1));
        }
        dyn.head(n) = traj.x[j].head(n) - inst.xi[j];
        for (int t = 0; t <= T; ++t) {
            const auto &st = inst.stage(j, t);
            const auto x = traj.x[j].segment(t * n, n);
            VectorXd lhs = st.C * x;
            if (t < T) {
                const auto u = traj.u[j].segment(t * m, m);
                lhs += st.D * u;
                const VectorXd prev = j == 0 ? inst.chi[t] : VectorXd(traj.x[j - 1].segment(t * np, np));
                const VectorXd next = j == inst.N - 1 ? inst.zeta[t] : VectorXd(traj.x[j + 1].segment(t * nn, nn));
                dyn.segment((t + 1) * n, n) =
                    traj.x[j].segment((t + 1) * n, n) - st.A * x - st.B * u - st.E * prev - st.F * next;
            }
            con.segment(t * nu, nu) = (lhs - st.kappa).cwiseMax(0.0);
            if (slacks)
                slk.segment(t * nu, nu) = lhs + (*slacks)[j].segment(t * nu, nu) - st.kappa;
        }
        if (dyn.size())
            rep.max_dynamics = std::max(rep.max_dynamics, dyn.cwiseAbs().maxCoeff());
        if (con.size())
            rep.max_constraint = std::max(rep.max_constraint, con.maxCoeff());
        if (slacks && slk.size())
            rep.max_slack = std::max(rep.max_slack, slk.cwiseAbs().maxCoeff());
        rep.dynamics.push_back(std::move(dyn));
        rep.constraint.push_back(std::move(con));
        if (slacks)
            rep.slack.push_back(std::move(slk));
    }
    return rep;
}

Trajectory simulate(const ProblemInstance &inst, const std::vector<VectorXd> &inputs) {
    if (static_cast<int>(inputs.size()) != inst.N)
        throw DimensionError("input subsystem count differs from N");
    Trajectory traj = Trajectory::zeros(inst);
    for (int j = 0; j < inst.N; ++j) {
        if (inputs[j].size() != inst.m(j) * inst.T)
            throw DimensionError("input block has wrong size");
        traj.u[j] = inputs[j];
        traj.x[j].head(inst.n(j)) = inst.xi[j];
    }
    for (int t = 0; t < inst.T; ++t) {
        for (int j = 0; j < inst.N; ++j) {
            const int n = inst.n(j), m = inst.m(j), np = inst.n_prev(j), nn = inst.n_next(j);
            const auto &st = inst.stage(j, t);
            const VectorXd prev = j == 0 ? inst.chi[t] : VectorXd(traj.x[j - 1].segment(t * np, np));
            const VectorXd next = j == inst.N - 1 ? inst.zeta[t] : VectorXd(traj.x[j + 1].segment(t * nn, nn));
            traj.x[j].segment((t + 1) * n, n) = st.A * traj.x[j].segment(t * n, n) +
                                                st.B * traj.u[j].segment(t * m, m) + st.E * prev + st.F * next;
        }
    }
    return traj;
}

} // namespace pathcg
