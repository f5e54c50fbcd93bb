#pragma once

#include "smfr/types.hpp"

namespace smfr {

/// sign(v) * max(|v| - tau, 0)
inline double soft_threshold(double v, double tau) {
    if (v > tau) return v - tau;
    if (v < -tau) return v + tau;
    return 0.0;
}

/// Entrywise soft-thresholding.
Matrix soft_threshold(const Matrix& v, double tau);

/// f(A,B) = 0.5*||Y - XAB||_F^2 + l1*||A||_1,1 + l2*||B||_1,1 + l3*||A||_F^2
double objective(const Matrix& x, const Matrix& y, const Matrix& a, const Matrix& b,
                 const Penalties& pen);

/// Derivative of the squared-error term in B: -A'X'Y + A'X'XAB.
Matrix grad_b(const Matrix& x, const Matrix& y, const Matrix& a, const Matrix& b);

/// Derivative of the smooth part (squared error + ridge) in A:
/// -X'YB' + X'XABB' + 2*l3*A.
Matrix grad_a(const Matrix& x, const Matrix& y, const Matrix& a, const Matrix& b,
              double lambda3);

}  // namespace smfr
