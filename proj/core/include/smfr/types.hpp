#pragma once

#include <Eigen/Dense>

#include "smfr/errors.hpp"

namespace smfr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Regularization weights: lambda1 on ||A||_1,1, lambda2 on ||B||_1,1,
/// lambda3 on ||A||_F^2. All nonnegative; the alternating solver additionally
/// requires lambda3 > 0 to pin down the A/B scale split.
struct Penalties {
    double lambda1{0.0};
    double lambda2{0.0};
    double lambda3{0.0};

    void validate() const {
        if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0)
            throw InvalidConfig("penalties must be nonnegative");
    }
};

/// Column statistics recorded by center_and_normalize, sufficient to map new
/// predictor data onto the training scale and to un-center predictions.
struct PreprocessStats {
    Vector x_means;  // p
    Vector x_norms;  // p, strictly positive
    Vector y_means;  // q
};

/// A fitted factor regression model: predictors -> m_hat latent factors
/// (columns of a_hat) -> responses (rows of b_hat), on the normalized scale.
struct FactorModel {
    Matrix a_hat;  // p x m_hat
    Matrix b_hat;  // m_hat x q
    Index m_hat{0};
    Penalties penalties;
    PreprocessStats stats;
};

/// Throws ValidationError if any entry is NaN or infinite. Applied at data
/// boundaries (file loads, generators); library internals assume finiteness.
inline void ensure_finite(const Matrix& m, const char* what) {
    if (!m.allFinite())
        throw ValidationError(std::string(what) + " contains NaN or infinite entries");
}

inline void require_same_rows(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows())
        throw ShapeMismatch(std::string(what) + ": row counts differ (" +
                            std::to_string(a.rows()) + " vs " + std::to_string(b.rows()) + ")");
}

/// Coefficient matrix on the raw predictor scale: diag(1/x_norms) * A * B.
/// Predictions are x_new * D plus the centering offset handled by predict().
Matrix denormalized_coefficients(const FactorModel& model);

}  // namespace smfr
