#pragma once

// Loops for the few-by-few column-major blocks of the structured kernels. At
// these sizes the call overhead of a general Eigen product or triangular solve
// outweighs the arithmetic.

#include <Eigen/Core>

namespace pathcg::detail {

/// y += A x, or y += A' x when trans.
inline void small_gemv(const double *A, Eigen::Index rows, Eigen::Index cols, bool trans, const double *x,
                       double *y) {
    if (trans) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (Eigen::Index r = 0; r < rows; ++r)
                acc += A[c * rows + r] * x[r];
            y[c] += acc;
        }
        return;
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
        const double xc = x[c];
        for (Eigen::Index r = 0; r < rows; ++r)
            y[r] += A[c * rows + r] * xc;
    }
}

/// y -= A x, or y -= A' x when trans.
inline void small_gemv_sub(const double *A, Eigen::Index rows, Eigen::Index cols, bool trans, const double *x,
                           double *y) {
    if (trans) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (Eigen::Index r = 0; r < rows; ++r)
                acc += A[c * rows + r] * x[r];
            y[c] -= acc;
        }
        return;
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
        const double xc = x[c];
        for (Eigen::Index r = 0; r < rows; ++r)
            y[r] -= A[c * rows + r] * xc;
    }
}

/// x <- L^{-1} x, then x <- L'^{-1} x, with L the lower triangle of the s x s
/// block (a Cholesky factor).
inline void small_cholesky_solve(const double *L, Eigen::Index s, double *x) {
    for (Eigen::Index c = 0; c < s; ++c) {
        const double *col = L + c * s;
        const double xc = x[c] / col[c];
        x[c] = xc;
        for (Eigen::Index r = c + 1; r < s; ++r)
            x[r] -= col[r] * xc;
    }
    for (Eigen::Index r = s - 1; r >= 0; --r) {
        const double *col = L + r * s;
        double acc = x[r];
        for (Eigen::Index c = r + 1; c < s; ++c)
            acc -= col[c] * x[c];
        x[r] = acc / col[r];
    }
}

} // namespace pathcg::detail
