#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "smfr/factor_select.hpp"
#include "smfr/types.hpp"

namespace smfr {

/// Seeded random partition of rows 0..n-1 into k folds with sizes differing
/// by at most one. Returns the row -> fold assignment. Throws InvalidFolds if
/// k < 2 or k > n.
std::vector<int> kfold_split(Index n, int k, std::uint64_t seed);

struct CvPlan {
    int k{5};
    std::vector<Penalties> grid;
    std::uint64_t seed{0};
    std::vector<int> assignment;  // row -> fold
};

struct CvEntry {
    Penalties penalties;
    bool feasible{true};
    double mean_mse{0.0};
    std::vector<double> fold_mse;
};

struct CvResult {
    Penalties best;
    std::vector<CvEntry> table;  // one row per grid candidate, in grid order
};

/// K-fold cross-validation of select_factors over a penalty grid. For each
/// candidate, trains on k-1 folds and averages the held-fold MSE of the
/// resulting model; returns the minimizer, ties broken toward larger
/// lambda1 + lambda2. Candidates failing with NoValidFactorCount on any fold
/// are marked infeasible and excluded. Throws NoValidFactorCount if nothing
/// is feasible.
CvResult cv_select(const Matrix& xn, const Matrix& yc, Index r,
                   const std::vector<Penalties>& grid, int k, const SolverConfig& config,
                   const RankPolicy& policy = {});

/// Holdout variant: rows [0, n_train) train, the rest validate.
CvResult holdout_select(const Matrix& xn, const Matrix& yc, Index r,
                        const std::vector<Penalties>& grid, Index n_train,
                        const SolverConfig& config, const RankPolicy& policy = {});

/// Log grid anchored at the full-shrinkage scale ||X'Y||_inf / n:
/// lambda1, lambda2 in {0.01, 0.03, 0.1, 0.3, 1, 3} * scale, lambda3 in
/// {0.01, 0.1, 1}.
std::vector<Penalties> default_grid(const Matrix& xn, const Matrix& yc);

/// Generic k-fold CV for single-parameter coefficient estimators (the lasso
/// and ridge baselines): estimator(Xtr, Ytr, lambda) -> D. Returns the best
/// lambda and the per-candidate mean validation MSE, ties toward larger
/// lambda.
struct ScalarCvResult {
    double best{0.0};
    std::vector<double> mean_mse;  // aligned with the candidate list
};
ScalarCvResult cv_select_scalar(
    const Matrix& xn, const Matrix& yc, const std::vector<double>& candidates, int k,
    std::uint64_t seed,
    const std::function<Matrix(const Matrix&, const Matrix&, double)>& estimator);

}  // namespace smfr
