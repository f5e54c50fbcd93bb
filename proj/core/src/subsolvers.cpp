#include "smfr/subsolvers.hpp"

#include <algorithm>
#include <cmath>

#include "smfr/objective.hpp"

namespace smfr {

namespace {

constexpr int kRefreshEvery = 64;  // rebuild cached residuals to curb drift

double subgradient_violation(double grad, double coeff, double l1) {
    if (coeff != 0.0) return std::abs(grad + (coeff > 0 ? l1 : -l1));
    return std::max(std::abs(grad) - l1, 0.0);
}

void check_extras(const SubsolveExtras& extras, Index rows, Index cols,
                  const char* what) {
    if (extras.warm_start &&
        (extras.warm_start->rows() != rows || extras.warm_start->cols() != cols))
        throw ShapeMismatch(std::string(what) + ": warm start has wrong shape");
    if (extras.prox_weight < 0)
        throw InvalidConfig(std::string(what) + ": negative proximal weight");
    if (extras.prox_weight > 0 &&
        (!extras.prox_anchor || extras.prox_anchor->rows() != rows ||
         extras.prox_anchor->cols() != cols))
        throw ShapeMismatch(std::string(what) + ": proximal anchor missing or mis-shaped");
}

}  // namespace

std::pair<Matrix, InnerSolveReport> lasso_columns_gram(const Matrix& g, const Matrix& hty,
                                                       double y_sqnorm, double lambda2,
                                                       const InnerSolveOptions& opts,
                                                       const SubsolveExtras& extras) {
    const Index m = g.rows();
    const Index q = hty.cols();
    if (g.cols() != m || hty.rows() != m)
        throw ShapeMismatch("lasso_columns: Gram blocks do not conform");
    if (lambda2 < 0) throw InvalidConfig("lasso_columns: lambda2 must be nonnegative");
    if (!(opts.tol > 0)) throw InvalidConfig("lasso_columns: tol must be positive");
    check_extras(extras, m, q, "lasso_columns");

    const double mu = extras.prox_weight;
    InnerSolveReport report;

    // H = 0 (and no proximal pull): B = 0 is the exact solution
    if (mu == 0.0 && g.isZero(0.0)) {
        report.objective_value = 0.5 * y_sqnorm;
        return {Matrix::Zero(m, q), report};
    }

    Matrix b = extras.warm_start ? *extras.warm_start : Matrix::Zero(m, q);
    int worst_sweeps = 0;
    bool all_converged = true;

    for (Index j = 0; j < q; ++j) {
        auto col = b.col(j);
        Vector r = hty.col(j) - g * col;  // hty_j - G b
        int sweeps = 0;
        bool converged = false;
        while (sweeps < opts.max_sweeps) {
            ++sweeps;
            for (Index k = 0; k < m; ++k) {
                double c = g(k, k) + 2.0 * mu;
                if (c == 0.0) {
                    // zero design column: any mass here is pure penalty
                    if (col(k) != 0.0) {
                        r += g.col(k) * col(k);
                        col(k) = 0.0;
                    }
                    continue;
                }
                double z = r(k) + g(k, k) * col(k);
                if (mu > 0) z += 2.0 * mu * (*extras.prox_anchor)(k, j);
                const double next = soft_threshold(z, lambda2) / c;
                const double delta = next - col(k);
                if (delta != 0.0) {
                    r -= g.col(k) * delta;
                    col(k) = next;
                }
            }
            if (sweeps % kRefreshEvery == 0) r = hty.col(j) - g * col;

            double viol = 0.0;
            for (Index k = 0; k < m; ++k) {
                double grad = -r(k);
                if (mu > 0) grad += 2.0 * mu * (col(k) - (*extras.prox_anchor)(k, j));
                viol = std::max(viol, subgradient_violation(grad, col(k), lambda2));
            }
            if (viol <= opts.tol) {
                converged = true;
                break;
            }
        }
        worst_sweeps = std::max(worst_sweeps, sweeps);
        all_converged = all_converged && converged;
    }

    report.sweeps = worst_sweeps;
    report.converged = all_converged;
    report.kkt_residual = kkt_residual_b_gram(g, hty, b, lambda2);
    if (mu > 0) {
        // certify the proximal subproblem actually solved
        const Matrix grad = g * b - hty + 2.0 * mu * (b - *extras.prox_anchor);
        double viol = 0.0;
        for (Index jj = 0; jj < q; ++jj)
            for (Index k = 0; k < m; ++k)
                viol = std::max(viol,
                                subgradient_violation(grad(k, jj), b(k, jj), lambda2));
        report.kkt_residual = viol;
    }
    double quad = 0.5 * y_sqnorm;
    quad += 0.5 * (b.cwiseProduct(g * b)).sum() - (b.cwiseProduct(hty)).sum();
    report.objective_value = quad + lambda2 * b.lpNorm<1>();
    if (mu > 0) report.objective_value += mu * (b - *extras.prox_anchor).squaredNorm();
    return {std::move(b), report};
}

std::pair<Matrix, InnerSolveReport> lasso_columns(const Matrix& h, const Matrix& y,
                                                  double lambda2,
                                                  const InnerSolveOptions& opts,
                                                  const SubsolveExtras& extras) {
    require_same_rows(h, y, "lasso_columns");
    return lasso_columns_gram(h.transpose() * h, h.transpose() * y, y.squaredNorm(),
                              lambda2, opts, extras);
}

std::pair<Matrix, InnerSolveReport> elastic_net_a_gram(const Matrix& s, const Matrix& t,
                                                       double y_sqnorm, const Matrix& b,
                                                       double lambda1, double lambda3,
                                                       const InnerSolveOptions& opts,
                                                       const SubsolveExtras& extras) {
    const Index p = s.rows();
    const Index m = b.rows();
    if (s.cols() != p || t.rows() != p || t.cols() != b.cols())
        throw ShapeMismatch("elastic_net_a: Gram blocks do not conform");
    if (lambda1 < 0) throw InvalidConfig("elastic_net_a: lambda1 must be nonnegative");
    if (!(lambda3 > 0)) throw InvalidConfig("elastic_net_a: lambda3 must be positive");
    if (!(opts.tol > 0)) throw InvalidConfig("elastic_net_a: tol must be positive");
    check_extras(extras, p, m, "elastic_net_a");

    const double mu = extras.prox_weight;
    InnerSolveReport report;

    if (mu == 0.0 && b.isZero(0.0)) {
        // the quadratic term vanishes; the penalties alone pin A at zero
        report.objective_value = 0.5 * y_sqnorm;
        return {Matrix::Zero(p, m), report};
    }

    const Matrix w = b * b.transpose();  // m x m
    const Matrix v = t * b.transpose();  // p x m
    Matrix a = extras.warm_start ? *extras.warm_start : Matrix::Zero(p, m);
    Matrix k_cache = s * a;  // X'X A, maintained across coordinate updates

    int sweeps = 0;
    bool converged = false;
    while (sweeps < opts.max_sweeps) {
        ++sweeps;
        for (Index k = 0; k < m; ++k) {
            const double wkk = w(k, k);
            for (Index i = 0; i < p; ++i) {
                const double c = s(i, i) * wkk + 2.0 * lambda3 + 2.0 * mu;
                double grad = -v(i, k) + k_cache.row(i).dot(w.col(k)) +
                              2.0 * lambda3 * a(i, k);
                if (mu > 0) grad += 2.0 * mu * (a(i, k) - (*extras.prox_anchor)(i, k));
                const double target = c * a(i, k) - grad;
                const double next = soft_threshold(target, lambda1) / c;
                const double delta = next - a(i, k);
                if (delta != 0.0) {
                    a(i, k) = next;
                    k_cache.col(k) += delta * s.col(i);
                }
            }
        }
        if (sweeps % kRefreshEvery == 0) k_cache = s * a;

        Matrix grad = k_cache * w - v + 2.0 * lambda3 * a;
        if (mu > 0) grad += 2.0 * mu * (a - *extras.prox_anchor);
        double viol = 0.0;
        for (Index k = 0; k < m; ++k)
            for (Index i = 0; i < p; ++i)
                viol = std::max(viol, subgradient_violation(grad(i, k), a(i, k), lambda1));
        if (viol <= opts.tol) {
            converged = true;
            report.kkt_residual = viol;
            break;
        }
        report.kkt_residual = viol;
    }

    report.sweeps = sweeps;
    report.converged = converged;
    // 0.5*||Y - XAB||^2 in Gram form
    const Matrix atsa = a.transpose() * (s * a);
    double rss = y_sqnorm - 2.0 * (a.transpose() * t).cwiseProduct(b).sum() +
                 (atsa * b).cwiseProduct(b).sum();
    report.objective_value = 0.5 * std::max(rss, 0.0) + lambda3 * a.squaredNorm() +
                             lambda1 * a.lpNorm<1>();
    if (mu > 0) report.objective_value += mu * (a - *extras.prox_anchor).squaredNorm();
    return {std::move(a), report};
}

std::pair<Matrix, InnerSolveReport> elastic_net_a(const Matrix& x, const Matrix& y,
                                                  const Matrix& b, double lambda1,
                                                  double lambda3,
                                                  const InnerSolveOptions& opts,
                                                  const SubsolveExtras& extras) {
    require_same_rows(x, y, "elastic_net_a");
    if (b.cols() != y.cols()) throw ShapeMismatch("elastic_net_a: B and Y widths differ");
    return elastic_net_a_gram(x.transpose() * x, x.transpose() * y, y.squaredNorm(), b,
                              lambda1, lambda3, opts, extras);
}

double kkt_residual_b_gram(const Matrix& g, const Matrix& hty, const Matrix& b,
                           double lambda2) {
    if (g.cols() != g.rows() || b.rows() != g.rows() || hty.rows() != g.rows() ||
        hty.cols() != b.cols())
        throw ShapeMismatch("kkt_residual_b: blocks do not conform");
    const Matrix grad = g * b - hty;
    double viol = 0.0;
    for (Index j = 0; j < b.cols(); ++j)
        for (Index k = 0; k < b.rows(); ++k)
            viol = std::max(viol, subgradient_violation(grad(k, j), b(k, j), lambda2));
    return viol;
}

double kkt_residual_b(const Matrix& h, const Matrix& y, const Matrix& b, double lambda2) {
    require_same_rows(h, y, "kkt_residual_b");
    return kkt_residual_b_gram(h.transpose() * h, h.transpose() * y, b, lambda2);
}

double kkt_residual_a_gram(const Matrix& s, const Matrix& t, const Matrix& a,
                           const Matrix& b, double lambda1, double lambda3) {
    if (a.rows() != s.rows() || a.cols() != b.rows() || t.cols() != b.cols())
        throw ShapeMismatch("kkt_residual_a: blocks do not conform");
    const Matrix grad =
        s * a * (b * b.transpose()) - t * b.transpose() + 2.0 * lambda3 * a;
    double viol = 0.0;
    for (Index k = 0; k < a.cols(); ++k)
        for (Index i = 0; i < a.rows(); ++i)
            viol = std::max(viol, subgradient_violation(grad(i, k), a(i, k), lambda1));
    return viol;
}

double kkt_residual_a(const Matrix& x, const Matrix& y, const Matrix& a, const Matrix& b,
                      double lambda1, double lambda3) {
    require_same_rows(x, y, "kkt_residual_a");
    return kkt_residual_a_gram(x.transpose() * x, x.transpose() * y, a, b, lambda1,
                               lambda3);
}

}  // namespace smfr
