#include "smfr/modelsel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "smfr/rng.hpp"
#include "smfr/simbench.hpp"
#include "parallel_util.hpp"

namespace smfr {

namespace {

Matrix take_rows(const Matrix& m, const std::vector<Index>& rows) {
    Matrix out(static_cast<Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
    return out;
}

bool better(const CvEntry& candidate, const CvEntry& incumbent) {
    if (candidate.mean_mse != incumbent.mean_mse)
        return candidate.mean_mse < incumbent.mean_mse;
    // ties go to the sparser model
    return candidate.penalties.lambda1 + candidate.penalties.lambda2 >
           incumbent.penalties.lambda1 + incumbent.penalties.lambda2;
}

CvResult evaluate_grid(const Matrix& xn, const Matrix& yc, Index r,
                       const std::vector<Penalties>& grid,
                       const std::vector<std::vector<Index>>& train_sets,
                       const std::vector<std::vector<Index>>& val_sets,
                       const SolverConfig& config, const RankPolicy& policy) {
    if (grid.empty()) throw InvalidConfig("cv_select: empty penalty grid");
    for (const auto& pen : grid) pen.validate();

    const std::size_t n_folds = train_sets.size();
    std::vector<Matrix> x_train(n_folds), y_train(n_folds), x_val(n_folds), y_val(n_folds);
    for (std::size_t f = 0; f < n_folds; ++f) {
        x_train[f] = take_rows(xn, train_sets[f]);
        y_train[f] = take_rows(yc, train_sets[f]);
        x_val[f] = take_rows(xn, val_sets[f]);
        y_val[f] = take_rows(yc, val_sets[f]);
    }

    struct Cell {
        double mse{0.0};
        bool feasible{true};
    };
    std::vector<Cell> cells(grid.size() * n_folds);

    detail::parallel_for_index(cells.size(), 0, [&](std::size_t idx) {
        const std::size_t c = idx / n_folds;
        const std::size_t f = idx % n_folds;
        SolverConfig cfg = config;
        cfg.seed = derive_seed(config.seed, 7000 + f);
        try {
            SelectResult res =
                select_factors(x_train[f], y_train[f], r, grid[c], cfg, policy);
            const Matrix d_hat = res.model.a_hat * res.model.b_hat;
            cells[idx].mse = mse(x_val[f], y_val[f], d_hat);
        } catch (const NoValidFactorCount&) {
            cells[idx].feasible = false;
        }
    });

    CvResult out;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        CvEntry entry;
        entry.penalties = grid[c];
        for (std::size_t f = 0; f < n_folds; ++f) {
            const Cell& cell = cells[c * n_folds + f];
            entry.feasible = entry.feasible && cell.feasible;
            entry.fold_mse.push_back(cell.mse);
        }
        if (entry.feasible)
            entry.mean_mse =
                std::accumulate(entry.fold_mse.begin(), entry.fold_mse.end(), 0.0) /
                static_cast<double>(n_folds);
        else
            entry.mean_mse = std::numeric_limits<double>::quiet_NaN();
        out.table.push_back(std::move(entry));
    }

    const CvEntry* winner = nullptr;
    for (const auto& entry : out.table) {
        if (!entry.feasible) continue;
        if (!winner || better(entry, *winner)) winner = &entry;
    }
    if (!winner)
        throw NoValidFactorCount("cv_select: every grid candidate was infeasible");
    out.best = winner->penalties;
    return out;
}

}  // namespace

std::vector<int> kfold_split(Index n, int k, std::uint64_t seed) {
    if (k < 2 || static_cast<Index>(k) > n)
        throw InvalidFolds("kfold_split: need 2 <= k <= n (k=" + std::to_string(k) +
                           ", n=" + std::to_string(n) + ")");
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    Rng rng = make_rng(seed);
    for (Index i = n - 1; i > 0; --i) {
        const Index j = std::uniform_int_distribution<Index>(0, i)(rng);
        std::swap(perm[i], perm[j]);
    }
    std::vector<int> assignment(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) assignment[perm[i]] = static_cast<int>(i % k);
    return assignment;
}

CvResult cv_select(const Matrix& xn, const Matrix& yc, Index r,
                   const std::vector<Penalties>& grid, int k, const SolverConfig& config,
                   const RankPolicy& policy) {
    require_same_rows(xn, yc, "cv_select");
    const std::vector<int> assignment =
        kfold_split(xn.rows(), k, derive_seed(config.seed, 0xF01D5ULL));
    std::vector<std::vector<Index>> train_sets(k), val_sets(k);
    for (Index i = 0; i < xn.rows(); ++i) {
        for (int f = 0; f < k; ++f) {
            if (assignment[i] == f)
                val_sets[f].push_back(i);
            else
                train_sets[f].push_back(i);
        }
    }
    return evaluate_grid(xn, yc, r, grid, train_sets, val_sets, config, policy);
}

CvResult holdout_select(const Matrix& xn, const Matrix& yc, Index r,
                        const std::vector<Penalties>& grid, Index n_train,
                        const SolverConfig& config, const RankPolicy& policy) {
    require_same_rows(xn, yc, "holdout_select");
    if (n_train < 1 || n_train >= xn.rows())
        throw InvalidConfig("holdout_select: n_train must lie in [1, n)");
    std::vector<std::vector<Index>> train_sets(1), val_sets(1);
    for (Index i = 0; i < xn.rows(); ++i)
        (i < n_train ? train_sets[0] : val_sets[0]).push_back(i);
    return evaluate_grid(xn, yc, r, grid, train_sets, val_sets, config, policy);
}

std::vector<Penalties> default_grid(const Matrix& xn, const Matrix& yc) {
    require_same_rows(xn, yc, "default_grid");
    const double scale = (xn.transpose() * yc).cwiseAbs().maxCoeff() /
                         static_cast<double>(xn.rows());
    const double factors[] = {0.01, 0.03, 0.1, 0.3, 1.0, 3.0};
    const double l3s[] = {0.01, 0.1, 1.0};
    std::vector<Penalties> grid;
    for (double f1 : factors)
        for (double f2 : factors)
            for (double l3 : l3s) grid.push_back({f1 * scale, f2 * scale, l3});
    return grid;
}

ScalarCvResult cv_select_scalar(
    const Matrix& xn, const Matrix& yc, const std::vector<double>& candidates, int k,
    std::uint64_t seed,
    const std::function<Matrix(const Matrix&, const Matrix&, double)>& estimator) {
    require_same_rows(xn, yc, "cv_select_scalar");
    if (candidates.empty()) throw InvalidConfig("cv_select_scalar: empty candidate list");
    const std::vector<int> assignment = kfold_split(xn.rows(), k, seed);

    std::vector<std::vector<Index>> train_sets(k), val_sets(k);
    for (Index i = 0; i < xn.rows(); ++i)
        for (int f = 0; f < k; ++f)
            (assignment[i] == f ? val_sets[f] : train_sets[f]).push_back(i);

    std::vector<Matrix> x_train(k), y_train(k), x_val(k), y_val(k);
    for (int f = 0; f < k; ++f) {
        x_train[f] = take_rows(xn, train_sets[f]);
        y_train[f] = take_rows(yc, train_sets[f]);
        x_val[f] = take_rows(xn, val_sets[f]);
        y_val[f] = take_rows(yc, val_sets[f]);
    }

    std::vector<double> cell(candidates.size() * k, 0.0);
    detail::parallel_for_index(cell.size(), 0, [&](std::size_t idx) {
        const std::size_t c = idx / k;
        const std::size_t f = idx % k;
        const Matrix d = estimator(x_train[f], y_train[f], candidates[c]);
        cell[idx] = mse(x_val[f], y_val[f], d);
    });

    ScalarCvResult out;
    double best_mse = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        double mean = 0.0;
        for (int f = 0; f < k; ++f) mean += cell[c * k + f];
        mean /= k;
        out.mean_mse.push_back(mean);
        if (mean < best_mse || (mean == best_mse && candidates[c] > out.best)) {
            best_mse = mean;
            out.best = candidates[c];
        }
    }
    return out;
}

}  // namespace smfr
