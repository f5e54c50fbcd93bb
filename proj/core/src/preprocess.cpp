#include "smfr/preprocess.hpp"

namespace smfr {

Preprocessed center_and_normalize(const Matrix& x, const Matrix& y) {
    require_same_rows(x, y, "center_and_normalize");
    if (x.rows() < 2) throw ValidationError("center_and_normalize: need at least 2 rows");
    ensure_finite(x, "X");
    ensure_finite(y, "Y");

    Preprocessed out;
    out.stats.x_means = x.colwise().mean();
    out.x = x.rowwise() - out.stats.x_means.transpose();

    out.stats.x_norms.resize(x.cols());
    for (Index j = 0; j < x.cols(); ++j) {
        const double norm = out.x.col(j).norm();
        // a centered column of exact zeros never survives rounding; use a
        // scale-relative cutoff
        if (norm <= 1e-12 * std::max(1.0, x.col(j).norm())) throw ConstantColumn(j);
        out.stats.x_norms(j) = norm;
        out.x.col(j) /= norm;
    }

    out.stats.y_means = y.colwise().mean();
    out.y = y.rowwise() - out.stats.y_means.transpose();
    return out;
}

Matrix apply_x_transform(const PreprocessStats& stats, const Matrix& x_new) {
    if (x_new.cols() != stats.x_means.size())
        throw ShapeMismatch("apply_x_transform: expected " +
                            std::to_string(stats.x_means.size()) + " columns, got " +
                            std::to_string(x_new.cols()));
    Matrix xn = x_new.rowwise() - stats.x_means.transpose();
    xn.array().rowwise() /= stats.x_norms.transpose().array();
    return xn;
}

Matrix uncenter_y(const PreprocessStats& stats, Matrix y_centered) {
    if (y_centered.cols() != stats.y_means.size())
        throw ShapeMismatch("uncenter_y: expected " + std::to_string(stats.y_means.size()) +
                            " columns, got " + std::to_string(y_centered.cols()));
    y_centered.rowwise() += stats.y_means.transpose();
    return y_centered;
}

Matrix denormalized_coefficients(const FactorModel& model) {
    Matrix d = model.a_hat * model.b_hat;
    d.array().colwise() /= model.stats.x_norms.array();
    return d;
}

}  // namespace smfr
