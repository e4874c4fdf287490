#pragma once

#include <pathcg/iterate.hpp>
#include <pathcg/kkt.hpp>
#include <pathcg/precond.hpp>
#include <pathcg/problem.hpp>

#include <cstddef>
#include <vector>

/// Self-contained dense reference kernels. Nothing here calls into Eigen's
/// solvers; the conversions to and from Eigen types are plumbing for tests.
namespace pathcg::oracle {

/// Row-major dense matrix.
class DenseMatrix {
  public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0) : r_(rows), c_(cols), a_(rows * cols, fill) {}
    static DenseMatrix identity(std::size_t n);
    static DenseMatrix from_eigen(const MatrixXd &m);
    [[nodiscard]] MatrixXd to_eigen() const;

    [[nodiscard]] std::size_t rows() const { return r_; }
    [[nodiscard]] std::size_t cols() const { return c_; }
    double &operator()(std::size_t i, std::size_t j) { return a_[i * c_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * c_ + j]; }
    [[nodiscard]] const double *row(std::size_t i) const { return a_.data() + i * c_; }
    double *row(std::size_t i) { return a_.data() + i * c_; }

    [[nodiscard]] DenseMatrix transpose() const;
    [[nodiscard]] double max_abs() const;
    [[nodiscard]] bool is_finite() const;
    [[nodiscard]] bool is_symmetric(double tol) const;

  private:
    std::size_t r_ = 0, c_ = 0;
    std::vector<double> a_;
};

using Vec = std::vector<double>;

DenseMatrix operator*(const DenseMatrix &a, const DenseMatrix &b);
DenseMatrix operator+(const DenseMatrix &a, const DenseMatrix &b);
DenseMatrix operator-(const DenseMatrix &a, const DenseMatrix &b);
DenseMatrix operator*(double s, const DenseMatrix &a);
Vec operator*(const DenseMatrix &a, const Vec &x);
double norm_inf(const Vec &v);
Vec to_vec(const VectorXd &v);
VectorXd to_eigen(const Vec &v);

/// Partial-pivot LU, reusable for several right-hand sides.
class LuFactor {
  public:
    /// Throws std::runtime_error when a pivot falls below 1e-14 max|A|.
    explicit LuFactor(DenseMatrix a);
    [[nodiscard]] Vec solve(const Vec &b) const;
    [[nodiscard]] DenseMatrix solve(const DenseMatrix &b) const;
    [[nodiscard]] DenseMatrix inverse() const;

  private:
    DenseMatrix lu_;
    std::vector<std::size_t> piv_;
};

Vec lu_solve(const DenseMatrix &a, const Vec &b);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
/// Throws std::invalid_argument for input asymmetric beyond 1e-12 max|A|.
Vec sym_eigenvalues(const DenseMatrix &a);

/// rho(A). Symmetric input goes through sym_eigenvalues, anything else
/// through power iteration on the geometric growth rate.
double spectral_radius(const DenseMatrix &a);

/// Lower Cholesky factor; throws std::runtime_error unless A is positive definite.
DenseMatrix cholesky(const DenseMatrix &a);
/// X with L X = B for lower triangular L.
DenseMatrix lower_solve(const DenseMatrix &l, const DenseMatrix &b);

/// Newton system of the optimality conditions, assembled entry by entry from
/// the Lagrangian
///   1/2 sum l_jt + sum p'(-x_{t+1} + A x + B u + E x_prev + F x_next)
///   + sum lambda'(C x + D u + theta - kappa)
/// with complementarity lambda o theta = sigma mu. Variables are ordered per
/// subsystem as (x, u, p, lambda, theta), each stacked in time.
struct DenseKkt {
    DenseMatrix K;
    Vec b; ///< minus the residual of the optimality conditions
    std::vector<std::size_t> offset; ///< start of subsystem j's variables
    /// Indices of the (x, p) unknowns in reduced-system order.
    std::vector<std::size_t> reduced_index;
};

DenseKkt dense_kkt(const ProblemInstance &inst, const IpmIterate &it, double sigma_mu);

/// Solution of the dense system split back into the iterate layout.
Direction dense_kkt_direction(const ProblemInstance &inst, const DenseKkt &kkt, const Vec &solution);

/// Dense Schur complement of the KKT matrix onto the (x, p) unknowns, in
/// reduced-system order.
struct DenseSchur {
    DenseMatrix M;
    Vec b;
};
DenseSchur dense_schur(const DenseKkt &kkt);

struct SpectralDiagnostics {
    double rho = 0.0;            ///< rho(Delta^{-1} Sigma)
    double kappa_precond = 0.0;  ///< kappa(P_L^{-1} Psi)
    double kappa_bound = 0.0;    ///< (1 + rho^L) / (1 - rho^L)
    double psi_min = 0.0, psi_max = 0.0;
    double w_min = 0.0;          ///< smallest eigenvalue of W_L
    double two_delta_min = 0.0;  ///< smallest eigenvalue of 2 Delta - Psi
    double similarity_error = 0.0; ///< max|U' Psi U - (2 Delta - Psi)| / max|Psi|
    double identity_error = 0.0;   ///< max|W_L Psi - (I - (Delta^{-1} Sigma)^L)|
    double pairing_error = 0.0;    ///< max|blktrid(Delta, Upsilon) - Psi| / max|Psi|
};

inline constexpr std::size_t kCertifyLimit = 4000;

/// Dense spectral diagnostics for the Jacobi preconditioner on the reduced system. Psi is M^2 from the
/// dense reduced matrix; Delta keeps the entries of Psi whose row and column
/// belong to the same pair {2k, 2k+1}. When `pairs` is given its dense form
/// is compared against Psi as well.
SpectralDiagnostics certify(const ReducedSystem &red, int L, const PairedBlocks *pairs = nullptr);

/// Exact Psi^{-1} from a dense LU; test-only preconditioner.
class ExactDensePreconditioner final : public Preconditioner {
  public:
    explicit ExactDensePreconditioner(const ReducedSystem &red);
    void apply(const Exec &exec, std::span<const double> in, std::span<double> out) const override;
    [[nodiscard]] std::string name() const override { return "exact-dense"; }

  private:
    LuFactor lu_;
};

} // namespace pathcg::oracle
