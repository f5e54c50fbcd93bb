#pragma once

#include <vector>

#include "smfr/altmin.hpp"
#include "smfr/types.hpp"

namespace smfr {

/// Numerical surrogate for exact rank: singular values are counted above
/// rel_tol times the largest one.
struct RankPolicy {
    double rel_tol{1e-8};
};

/// Number of singular values sigma_k > rel_tol * sigma_max; 0 for the zero
/// matrix. Throws ValidationError for an empty matrix.
Index numerical_rank(const Matrix& m, const RankPolicy& policy = {});

struct SelectionAttempt {
    Index m{0};
    Index rank_a{0};
    Index rank_b{0};
    FitTrace trace;
};

struct SelectResult {
    FactorModel model;
    std::vector<SelectionAttempt> attempts;  // in decreasing-m order, ending at m_hat
};

/// Estimates the number of effective factors: starting at m = r, fits with a
/// fresh seeded initialization per m and returns the first (largest) m whose
/// fitted matrices both have numerical rank m. Decrements otherwise; throws
/// NoValidFactorCount if even m = 1 fails. The init strategy in config is
/// ignored here: each m draws A0 from a seed derived from (config.seed, m).
SelectResult select_factors(const Matrix& xn, const Matrix& yc, Index r,
                            const Penalties& pen, const SolverConfig& config,
                            const RankPolicy& policy = {},
                            const PreprocessStats* stats = nullptr);

}  // namespace smfr
