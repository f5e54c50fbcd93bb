#include "smfr/fspca.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace smfr {

SpcaResult fit_spca(const Matrix& xn, Index k, const Penalties& pen,
                    const SolverConfig& config, const RankPolicy& policy) {
    if (k < 1 || k > xn.cols())
        throw InvalidConfig("fit_spca: k must lie in [1, p]");
    FitResult fit = fit_fixed_m(xn, xn, k, pen, config);
    if (numerical_rank(fit.a_hat, policy) < k || numerical_rank(fit.b_hat, policy) < k)
        throw RankCollapse(k);

    SpcaResult out;
    out.adjusted_variance = adjusted_explained_variance(xn, fit.a_hat);
    out.loading_nonzeros.reserve(k);
    out.loading_l1.resize(k);
    for (Index j = 0; j < k; ++j) {
        out.loading_nonzeros.push_back(
            (fit.a_hat.col(j).array() != 0.0).count());
        out.loading_l1(j) = fit.a_hat.col(j).lpNorm<1>();
    }
    out.components = std::move(fit.a_hat);
    out.contributions = std::move(fit.b_hat);
    out.trace = std::move(fit.trace);
    return out;
}

Vector adjusted_explained_variance(const Matrix& xn, const Matrix& a) {
    if (a.rows() != xn.cols())
        throw ShapeMismatch("adjusted_explained_variance: A rows must equal X cols");
    const Index k = a.cols();
    if (k < 1) throw ValidationError("adjusted_explained_variance: A has no columns");
    const double total = xn.squaredNorm();
    if (!(total > 0))
        throw ValidationError("adjusted_explained_variance: X is zero");

    Vector adjusted(k);
    std::vector<Vector> basis;  // orthonormal spans of the earlier scores
    basis.reserve(k);
    for (Index j = 0; j < k; ++j) {
        const double col_norm = a.col(j).norm();
        if (col_norm == 0.0)
            throw DependentComponents("component " + std::to_string(j) +
                                      " has a zero loading vector");
        Vector z = xn * (a.col(j) / col_norm);  // scale-free score
        const double z_norm = z.norm();
        Vector r = z;
        for (const Vector& qvec : basis) r -= qvec.dot(r) * qvec;
        // one re-orthogonalization pass keeps the basis tight
        for (const Vector& qvec : basis) r -= qvec.dot(r) * qvec;
        const double r_norm = r.norm();
        if (r_norm < 1e-12 * z_norm)
            throw DependentComponents("component " + std::to_string(j) +
                                      " lies in the span of its predecessors");
        adjusted(j) = r.squaredNorm() / total;
        basis.push_back(r / r_norm);
    }
    return adjusted;
}

Matrix thresholding_baseline(const Matrix& xn, Index k, Index keep) {
    if (k < 1 || k > std::min(xn.rows(), xn.cols()))
        throw InvalidConfig("thresholding_baseline: k must lie in [1, min(n, p)]");
    if (keep < 1 || keep > xn.cols())
        throw InvalidConfig("thresholding_baseline: keep must lie in [1, p]");
    Eigen::BDCSVD<Matrix> svd(xn, Eigen::ComputeThinV);
    Matrix loadings = svd.matrixV().leftCols(k);
    if (keep >= loadings.rows()) return loadings;

    const Index p = loadings.rows();
    std::vector<Index> order(static_cast<std::size_t>(p));
    for (Index j = 0; j < k; ++j) {
        for (Index i = 0; i < p; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](Index l, Index r) {
            return std::abs(loadings(l, j)) > std::abs(loadings(r, j));
        });
        for (Index t = keep; t < p; ++t) loadings(order[t], j) = 0.0;
    }
    return loadings;
}

}  // namespace smfr
