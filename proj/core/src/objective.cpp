#include "smfr/objective.hpp"

namespace smfr {

namespace {

void check_shapes(const Matrix& x, const Matrix& y, const Matrix& a, const Matrix& b) {
    if (x.cols() != a.rows() || a.cols() != b.rows() || x.rows() != y.rows() ||
        b.cols() != y.cols())
        throw ShapeMismatch("objective: X " + std::to_string(x.rows()) + "x" +
                            std::to_string(x.cols()) + ", A " + std::to_string(a.rows()) +
                            "x" + std::to_string(a.cols()) + ", B " +
                            std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                            ", Y " + std::to_string(y.rows()) + "x" +
                            std::to_string(y.cols()) + " do not conform");
}

}  // namespace

Matrix soft_threshold(const Matrix& v, double tau) {
    return v.unaryExpr([tau](double e) { return soft_threshold(e, tau); });
}

double objective(const Matrix& x, const Matrix& y, const Matrix& a, const Matrix& b,
                 const Penalties& pen) {
    check_shapes(x, y, a, b);
    const double rss = (y - (x * a) * b).squaredNorm();
    return 0.5 * rss + pen.lambda1 * a.lpNorm<1>() + pen.lambda2 * b.lpNorm<1>() +
           pen.lambda3 * a.squaredNorm();
}

Matrix grad_b(const Matrix& x, const Matrix& y, const Matrix& a, const Matrix& b) {
    check_shapes(x, y, a, b);
    const Matrix h = x * a;
    return h.transpose() * (h * b - y);
}

Matrix grad_a(const Matrix& x, const Matrix& y, const Matrix& a, const Matrix& b,
              double lambda3) {
    check_shapes(x, y, a, b);
    return x.transpose() * ((x * a) * b - y) * b.transpose() + 2.0 * lambda3 * a;
}

}  // namespace smfr
