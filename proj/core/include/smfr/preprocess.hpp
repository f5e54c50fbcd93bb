#pragma once

#include "smfr/types.hpp"

namespace smfr {

struct Preprocessed {
    Matrix x;  // columns zero-mean, unit Euclidean norm
    Matrix y;  // columns zero-mean
    PreprocessStats stats;
};

/// Centers both matrices columnwise and scales X columns to unit Euclidean
/// norm (so x_i' * x_j is exactly the feature correlation). Throws
/// ConstantColumn for zero-variance predictors, ShapeMismatch on row counts.
Preprocessed center_and_normalize(const Matrix& x, const Matrix& y);

/// Maps new predictor rows onto the training scale: (x - means) / norms.
Matrix apply_x_transform(const PreprocessStats& stats, const Matrix& x_new);

/// Adds back the response means removed during preprocessing.
Matrix uncenter_y(const PreprocessStats& stats, Matrix y_centered);

}  // namespace smfr
