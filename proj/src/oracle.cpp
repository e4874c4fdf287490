#include <pathcg/oracle.hpp>

#include <pathcg/errors.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pathcg::oracle {

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix I(n, n);
    for (std::size_t i = 0; i < n; ++i)
        I(i, i) = 1.0;
    return I;
}

DenseMatrix DenseMatrix::from_eigen(const MatrixXd &m) {
    DenseMatrix d(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (std::size_t i = 0; i < d.rows(); ++i)
        for (std::size_t j = 0; j < d.cols(); ++j)
            d(i, j) = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return d;
}

MatrixXd DenseMatrix::to_eigen() const {
    MatrixXd m(static_cast<Eigen::Index>(r_), static_cast<Eigen::Index>(c_));
    for (std::size_t i = 0; i < r_; ++i)
        for (std::size_t j = 0; j < c_; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(i, j);
    return m;
}

DenseMatrix DenseMatrix::transpose() const {
    DenseMatrix t(c_, r_);
    for (std::size_t i = 0; i < r_; ++i)
        for (std::size_t j = 0; j < c_; ++j)
            t(j, i) = (*this)(i, j);
    return t;
}

double DenseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : a_)
        m = std::max(m, std::abs(v));
    return m;
}

bool DenseMatrix::is_finite() const {
    return std::all_of(a_.begin(), a_.end(), [](double v) { return std::isfinite(v); });
}

bool DenseMatrix::is_symmetric(double tol) const {
    if (r_ != c_)
        return false;
    for (std::size_t i = 0; i < r_; ++i)
        for (std::size_t j = i + 1; j < c_; ++j)
            if (std::abs((*this)(i, j) - (*this)(j, i)) > tol)
                return false;
    return true;
}

DenseMatrix operator*(const DenseMatrix &a, const DenseMatrix &b) {
    if (a.cols() != b.rows())
        throw DimensionError("dense product: inner dimensions differ");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double *ci = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0)
                continue;
            const double *bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j)
                ci[j] += aik * bk[j];
        }
    }
    return c;
}

namespace {

template <class Op>
DenseMatrix zip(const DenseMatrix &a, const DenseMatrix &b, Op op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("dense elementwise op: shapes differ");
    DenseMatrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            c(i, j) = op(a(i, j), b(i, j));
    return c;
}

DenseMatrix symmetrized(const DenseMatrix &a) {
    DenseMatrix s = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            s(i, j) = 0.5 * (a(i, j) + a(j, i));
    return s;
}

} // namespace

DenseMatrix operator+(const DenseMatrix &a, const DenseMatrix &b) {
    return zip(a, b, [](double x, double y) { return x + y; });
}
DenseMatrix operator-(const DenseMatrix &a, const DenseMatrix &b) {
    return zip(a, b, [](double x, double y) { return x - y; });
}

DenseMatrix operator*(double s, const DenseMatrix &a) {
    DenseMatrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            c(i, j) *= s;
    return c;
}

Vec operator*(const DenseMatrix &a, const Vec &x) {
    if (a.cols() != x.size())
        throw DimensionError("dense matvec: length differs from column count");
    Vec y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double *ai = a.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j)
            s += ai[j] * x[j];
        y[i] = s;
    }
    return y;
}

double norm_inf(const Vec &v) {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

Vec to_vec(const VectorXd &v) { return {v.data(), v.data() + v.size()}; }

VectorXd to_eigen(const Vec &v) {
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// ---------------------------------------------------------------- LU

LuFactor::LuFactor(DenseMatrix a) : lu_(std::move(a)) {
    if (lu_.rows() != lu_.cols())
        throw DimensionError("LU: matrix is not square");
    const std::size_t n = lu_.rows();
    const double floor = 1e-14 * lu_.max_abs();
    piv_.resize(n);
    std::iota(piv_.begin(), piv_.end(), std::size_t{0});
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(lu_(i, k)) > std::abs(lu_(p, k)))
                p = i;
        if (!(std::abs(lu_(p, k)) > floor))
            throw std::runtime_error("LU: matrix singular to working precision at column " + std::to_string(k));
        if (p != k) {
            std::swap_ranges(lu_.row(k), lu_.row(k) + n, lu_.row(p));
            std::swap(piv_[k], piv_[p]);
        }
        const double *rk = lu_.row(k);
        for (std::size_t i = k + 1; i < n; ++i) {
            double *ri = lu_.row(i);
            const double l = ri[k] / rk[k];
            ri[k] = l;
            if (l == 0.0)
                continue;
            for (std::size_t j = k + 1; j < n; ++j)
                ri[j] -= l * rk[j];
        }
    }
}

Vec LuFactor::solve(const Vec &b) const {
    const std::size_t n = lu_.rows();
    if (b.size() != n)
        throw DimensionError("LU solve: right-hand side length differs");
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = b[piv_[i]];
    for (std::size_t i = 0; i < n; ++i) {
        const double *ri = lu_.row(i);
        for (std::size_t j = 0; j < i; ++j)
            x[i] -= ri[j] * x[j];
    }
    for (std::size_t i = n; i-- > 0;) {
        const double *ri = lu_.row(i);
        for (std::size_t j = i + 1; j < n; ++j)
            x[i] -= ri[j] * x[j];
        x[i] /= ri[i];
    }
    return x;
}

DenseMatrix LuFactor::solve(const DenseMatrix &b) const {
    DenseMatrix x(b.rows(), b.cols());
    Vec col(b.rows());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t i = 0; i < b.rows(); ++i)
            col[i] = b(i, j);
        const Vec s = solve(col);
        for (std::size_t i = 0; i < b.rows(); ++i)
            x(i, j) = s[i];
    }
    return x;
}

DenseMatrix LuFactor::inverse() const { return solve(DenseMatrix::identity(lu_.rows())); }

Vec lu_solve(const DenseMatrix &a, const Vec &b) { return LuFactor(a).solve(b); }

// ---------------------------------------------------------------- spectra

Vec sym_eigenvalues(const DenseMatrix &a_in) {
    if (a_in.rows() != a_in.cols())
        throw DimensionError("eigenvalues: matrix is not square");
    if (!a_in.is_symmetric(1e-12 * std::max(1.0, a_in.max_abs())))
        throw std::invalid_argument("eigenvalues: matrix is not symmetric");
    DenseMatrix a = symmetrized(a_in);
    const std::size_t n = a.rows();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            total += a(i, j) * a(i, j);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                off += a(i, j) * a(i, j);
        if (off <= 1e-30 * total || off == 0.0)
            break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0)
                    continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
            }
    }
    Vec ev(n);
    for (std::size_t i = 0; i < n; ++i)
        ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

double spectral_radius(const DenseMatrix &a) {
    if (a.rows() != a.cols())
        throw DimensionError("spectral radius: matrix is not square");
    const std::size_t n = a.rows();
    if (n == 0)
        return 0.0;
    if (a.is_symmetric(1e-12 * std::max(1.0, a.max_abs()))) {
        const Vec ev = sym_eigenvalues(a);
        return std::max(std::abs(ev.front()), std::abs(ev.back()));
    }
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = 1.0 + 0.37 * static_cast<double>(i % 7);
    constexpr int kBurn = 500, kWindow = 1500;
    double log_growth = 0.0;
    for (int it = 0; it < kBurn + kWindow; ++it) {
        const double nv = norm_inf(v);
        Vec w = a * v;
        const double nw = norm_inf(w);
        if (nw == 0.0)
            return 0.0;
        if (it >= kBurn)
            log_growth += std::log(nw / nv);
        for (auto &x : w)
            x /= nw;
        v = std::move(w);
    }
    return std::exp(log_growth / kWindow);
}

DenseMatrix cholesky(const DenseMatrix &a) {
    if (a.rows() != a.cols())
        throw DimensionError("cholesky: matrix is not square");
    const std::size_t n = a.rows();
    DenseMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k)
            d -= l(j, k) * l(j, k);
        if (!(d > 0.0))
            throw std::runtime_error("cholesky: matrix not positive definite at column " + std::to_string(j));
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k)
                s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

DenseMatrix lower_solve(const DenseMatrix &l, const DenseMatrix &b) {
    const std::size_t n = l.rows();
    if (b.rows() != n)
        throw DimensionError("lower solve: row count differs");
    DenseMatrix x = b;
    for (std::size_t i = 0; i < n; ++i) {
        double *xi = x.row(i);
        for (std::size_t k = 0; k < i; ++k) {
            const double lik = l(i, k);
            if (lik == 0.0)
                continue;
            const double *xk = x.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j)
                xi[j] -= lik * xk[j];
        }
        for (std::size_t j = 0; j < b.cols(); ++j)
            xi[j] /= l(i, i);
    }
    return x;
}

// ---------------------------------------------------------------- KKT

namespace {

struct Index {
    std::size_t x, u, p, l, th;
    int n, m, nu;
};

// K(r0 + i, c0 + k) += s * M(i, k) (or M(k, i) when transposed).
void put(DenseMatrix &K, std::size_t r0, std::size_t c0, const MatrixXd &M, bool transposed = false, double s = 1.0) {
    const auto rows = transposed ? M.cols() : M.rows();
    const auto cols = transposed ? M.rows() : M.cols();
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index k = 0; k < cols; ++k)
            K(r0 + static_cast<std::size_t>(i), c0 + static_cast<std::size_t>(k)) +=
                s * (transposed ? M(k, i) : M(i, k));
}

void put_identity(DenseMatrix &K, std::size_t r0, std::size_t c0, int n, double s) {
    for (int i = 0; i < n; ++i)
        K(r0 + static_cast<std::size_t>(i), c0 + static_cast<std::size_t>(i)) += s;
}

void put_vec(Vec &r, std::size_t r0, const VectorXd &v, double s = 1.0) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        r[r0 + static_cast<std::size_t>(i)] += s * v[i];
}

} // namespace

DenseKkt dense_kkt(const ProblemInstance &inst, const IpmIterate &it, double sigma_mu) {
    check_layout(inst, it);
    const int N = inst.N, T = inst.T;
    const auto T1 = static_cast<std::size_t>(T + 1);
    std::vector<Index> ix(N);
    std::size_t total = 0;
    DenseKkt out;
    for (int j = 0; j < N; ++j) {
        Index &I = ix[j];
        I.n = inst.n(j);
        I.m = inst.m(j);
        I.nu = inst.nu(j);
        I.x = total;
        I.u = I.x + I.n * T1;
        I.p = I.u + static_cast<std::size_t>(I.m * T);
        I.l = I.p + I.n * T1;
        I.th = I.l + I.nu * T1;
        out.offset.push_back(total);
        total = I.th + I.nu * T1;
    }
    for (int j = 0; j < N; ++j) {
        for (int t = 0; t <= T; ++t)
            for (int i = 0; i < ix[j].n; ++i)
                out.reduced_index.push_back(ix[j].x + static_cast<std::size_t>(t * ix[j].n + i));
        for (int t = 0; t <= T; ++t)
            for (int i = 0; i < ix[j].n; ++i)
                out.reduced_index.push_back(ix[j].p + static_cast<std::size_t>(t * ix[j].n + i));
    }

    DenseMatrix K(total, total);
    Vec c(total, 0.0); // constant part of the residual
    auto X = [&](int j, int t) { return ix[j].x + static_cast<std::size_t>(t * ix[j].n); };
    auto U = [&](int j, int t) { return ix[j].u + static_cast<std::size_t>(t * ix[j].m); };
    auto P = [&](int j, int t) { return ix[j].p + static_cast<std::size_t>(t * ix[j].n); };
    auto Lm = [&](int j, int t) { return ix[j].l + static_cast<std::size_t>(t * ix[j].nu); };
    auto Th = [&](int j, int t) { return ix[j].th + static_cast<std::size_t>(t * ix[j].nu); };

    for (int j = 0; j < N; ++j) {
        const int n = ix[j].n, nu = ix[j].nu;
        for (int t = 0; t <= T; ++t) {
            const StageData &s = inst.stage(j, t);
            // d/dx_{j,t}
            put(K, X(j, t), X(j, t), s.Q);
            put_identity(K, X(j, t), P(j, t), n, -1.0);
            put(K, X(j, t), Lm(j, t), s.C, true);
            if (t < T) {
                put(K, X(j, t), U(j, t), s.S, true);
                put(K, X(j, t), P(j, t + 1), s.A, true);
                if (j > 0)
                    put(K, X(j, t), P(j - 1, t + 1), inst.stage(j - 1, t).F, true);
                if (j + 1 < N)
                    put(K, X(j, t), P(j + 1, t + 1), inst.stage(j + 1, t).E, true);
                // d/du_{j,t}
                put(K, U(j, t), X(j, t), s.S);
                put(K, U(j, t), U(j, t), s.R);
                put(K, U(j, t), P(j, t + 1), s.B, true);
                put(K, U(j, t), Lm(j, t), s.D, true);
                // d/dp_{j,t+1}: -x_{t+1} + A x_t + B u_t + E x_{j-1,t} + F x_{j+1,t}
                put_identity(K, P(j, t + 1), X(j, t + 1), n, -1.0);
                put(K, P(j, t + 1), X(j, t), s.A);
                put(K, P(j, t + 1), U(j, t), s.B);
                if (j > 0)
                    put(K, P(j, t + 1), X(j - 1, t), s.E);
                else
                    put_vec(c, P(j, t + 1), s.E * inst.chi[static_cast<std::size_t>(t)]);
                if (j + 1 < N)
                    put(K, P(j, t + 1), X(j + 1, t), s.F);
                else
                    put_vec(c, P(j, t + 1), s.F * inst.zeta[static_cast<std::size_t>(t)]);
                put(K, Lm(j, t), U(j, t), s.D);
            }
            // d/dlambda: C x + D u + theta - kappa
            put(K, Lm(j, t), X(j, t), s.C);
            put_identity(K, Lm(j, t), Th(j, t), nu, 1.0);
            put_vec(c, Lm(j, t), s.kappa, -1.0);
            // complementarity
            for (int i = 0; i < nu; ++i) {
                const std::size_t k = static_cast<std::size_t>(t * nu + i);
                K(Th(j, t) + i, Lm(j, t) + i) = it.theta[j][static_cast<Eigen::Index>(k)];
                K(Th(j, t) + i, Th(j, t) + i) = it.lambda[j][static_cast<Eigen::Index>(k)];
            }
        }
        // d/dp_{j,0}: -x_0 + xi
        put_identity(K, P(j, 0), X(j, 0), n, -1.0);
        put_vec(c, P(j, 0), inst.xi[static_cast<std::size_t>(j)]);
    }

    // Residual: every block except complementarity is affine in s.
    Vec s(total);
    for (int j = 0; j < N; ++j) {
        auto copy = [&](std::size_t o, const VectorXd &v) {
            for (Eigen::Index i = 0; i < v.size(); ++i)
                s[o + static_cast<std::size_t>(i)] = v[i];
        };
        copy(ix[j].x, it.x[j]);
        copy(ix[j].u, it.u[j]);
        copy(ix[j].p, it.p[j]);
        copy(ix[j].l, it.lambda[j]);
        copy(ix[j].th, it.theta[j]);
    }
    Vec r = K * s;
    for (std::size_t i = 0; i < total; ++i)
        r[i] += c[i];
    for (int j = 0; j < N; ++j)
        for (Eigen::Index i = 0; i < it.lambda[j].size(); ++i)
            r[ix[j].th + static_cast<std::size_t>(i)] = it.lambda[j][i] * it.theta[j][i] - sigma_mu;
    out.b.resize(total);
    for (std::size_t i = 0; i < total; ++i)
        out.b[i] = -r[i];
    out.K = std::move(K);
    return out;
}

Direction dense_kkt_direction(const ProblemInstance &inst, const DenseKkt &kkt, const Vec &sol) {
    Direction d = Direction::zeros(inst);
    for (int j = 0; j < inst.N; ++j) {
        std::size_t o = kkt.offset[static_cast<std::size_t>(j)];
        for (VectorXd *v : {&d.x[j], &d.u[j], &d.p[j], &d.lambda[j], &d.theta[j]})
            for (Eigen::Index i = 0; i < v->size(); ++i)
                (*v)[i] = sol[o++];
    }
    return d;
}

DenseSchur dense_schur(const DenseKkt &kkt) {
    const std::size_t n = kkt.K.rows();
    const auto &keep = kkt.reduced_index;
    std::vector<char> kept(n, 0);
    for (auto i : keep)
        kept[i] = 1;
    std::vector<std::size_t> elim;
    for (std::size_t i = 0; i < n; ++i)
        if (!kept[i])
            elim.push_back(i);
    auto sub = [&](const std::vector<std::size_t> &r, const std::vector<std::size_t> &c) {
        DenseMatrix m(r.size(), c.size());
        for (std::size_t a = 0; a < r.size(); ++a)
            for (std::size_t b = 0; b < c.size(); ++b)
                m(a, b) = kkt.K(r[a], c[b]);
        return m;
    };
    DenseSchur out;
    out.M = sub(keep, keep);
    out.b.resize(keep.size());
    for (std::size_t a = 0; a < keep.size(); ++a)
        out.b[a] = kkt.b[keep[a]];
    if (elim.empty())
        return out;
    const LuFactor ee(sub(elim, elim));
    const DenseMatrix ke = sub(keep, elim);
    out.M = out.M - ke * ee.solve(sub(elim, keep));
    Vec be(elim.size());
    for (std::size_t a = 0; a < elim.size(); ++a)
        be[a] = kkt.b[elim[a]];
    const Vec corr = ke * ee.solve(be);
    for (std::size_t a = 0; a < keep.size(); ++a)
        out.b[a] -= corr[a];
    return out;
}

// ---------------------------------------------------------------- certify

SpectralDiagnostics certify(const ReducedSystem &red, int L, const PairedBlocks *pairs) {
    if (L < 1)
        throw std::invalid_argument("certify: L must be >= 1");
    const auto n = static_cast<std::size_t>(red.dim());
    if (n > kCertifyLimit)
        throw DimensionError("certify: dimension " + std::to_string(n) + " exceeds dense limit");

    const DenseMatrix M = DenseMatrix::from_eigen(pathcg::to_dense(red.to_blocktri()));
    const DenseMatrix Psi = symmetrized(M * M);
    const double scale = std::max(1.0, Psi.max_abs());

    std::vector<int> pair(n);
    for (int j = 0; j < red.N(); ++j) {
        const auto lo = static_cast<std::size_t>(red.offset(j));
        const auto len = static_cast<std::size_t>(2 * red.sub(j).n * (red.T() + 1));
        for (std::size_t i = lo; i < lo + len; ++i)
            pair[i] = j / 2;
    }

    DenseMatrix Delta(n, n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (pair[a] == pair[b])
                Delta(a, b) = Psi(a, b);
    const DenseMatrix Sigma = Delta - Psi;

    SpectralDiagnostics d;
    const Vec psi_ev = sym_eigenvalues(Psi);
    d.psi_min = psi_ev.front();
    d.psi_max = psi_ev.back();

    // rho(Delta^{-1} Sigma) through the similarity L^{-1} Sigma L^{-T}.
    const DenseMatrix Lc = cholesky(Delta);
    const DenseMatrix G = symmetrized(lower_solve(Lc, lower_solve(Lc, Sigma).transpose()));
    const Vec mu = sym_eigenvalues(G);
    d.rho = std::max(std::abs(mu.front()), std::abs(mu.back()));
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double m : mu) {
        const double e = 1.0 - std::pow(m, L);
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    d.kappa_precond = hi / lo;
    const double rl = std::pow(d.rho, L);
    d.kappa_bound = (1.0 + rl) / (1.0 - rl);

    // W_L and the identity W_L Psi = I - (Delta^{-1} Sigma)^L.
    const DenseMatrix Dinv = LuFactor(Delta).inverse();
    const DenseMatrix H = Dinv * Sigma;
    DenseMatrix term = Dinv, W = Dinv, HL = H;
    for (int l = 1; l < L; ++l) {
        term = H * term;
        W = W + term;
        HL = H * HL;
    }
    d.w_min = sym_eigenvalues(symmetrized(W)).front();
    d.identity_error = (W * Psi - (DenseMatrix::identity(n) - HL)).max_abs();

    // U' Psi U = 2 Delta - Psi with U = blkdiag(+-I) alternating over pairs.
    const DenseMatrix two_delta = 2.0 * Delta - Psi;
    double sim = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const double sa = pair[a] % 2 ? -1.0 : 1.0, sb = pair[b] % 2 ? -1.0 : 1.0;
            sim = std::max(sim, std::abs(sa * Psi(a, b) * sb - two_delta(a, b)));
        }
    d.similarity_error = sim / scale;
    d.two_delta_min = sym_eigenvalues(two_delta).front();

    if (pairs) {
        const MatrixXd P = pairs->to_dense();
        const auto &perm = pairs->layout().permutation();
        double err = 0.0;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                err = std::max(err, std::abs(P(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) -
                                             Psi(static_cast<std::size_t>(perm[a]), static_cast<std::size_t>(perm[b]))));
        d.pairing_error = err / scale;
    }
    return d;
}

namespace {

DenseMatrix dense_psi(const ReducedSystem &red) {
    if (static_cast<std::size_t>(red.dim()) > kCertifyLimit)
        throw DimensionError("exact preconditioner: dimension exceeds dense limit");
    const DenseMatrix M = DenseMatrix::from_eigen(pathcg::to_dense(red.to_blocktri()));
    return M * M;
}

} // namespace

ExactDensePreconditioner::ExactDensePreconditioner(const ReducedSystem &red) : lu_(dense_psi(red)) {}

void ExactDensePreconditioner::apply(const Exec &, std::span<const double> in, std::span<double> out) const {
    const Vec x = lu_.solve(Vec(in.begin(), in.end()));
    std::copy(x.begin(), x.end(), out.begin());
}

} // namespace pathcg::oracle
