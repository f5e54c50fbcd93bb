#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "smfr/modelsel.hpp"
#include "smfr/subsolvers.hpp"
#include "smfr/types.hpp"

namespace smfr {

/// D = A*B with row-sparse A and Bernoulli-masked B.
struct FactorStructure {};
/// D with iid Bernoulli(density) support.
struct ElementwiseSparse {
    double density{0.2};
};
/// D with round(zero_row_frac * p) all-zero rows; remaining rows have
/// Bernoulli(within_density) support.
struct RowwiseSparse {
    double zero_row_frac{0.6};
    double within_density{0.3};
};
using StructureSpec = std::variant<FactorStructure, ElementwiseSparse, RowwiseSparse>;

/// Generative parameters for one synthetic regression problem.
struct SimSpec {
    Index n{50};
    Index p{150};
    Index q{50};
    Index m{10};
    Index m0{1};
    double sigma_n{3.0};
    double s{0.2};
    std::uint64_t seed{0};
    StructureSpec structure{FactorStructure{}};

    void validate() const;
};

/// n x p predictor matrix, rows iid N(0, Sigma_X) with Sigma_X[i][j] =
/// 0.7^|j-i|, sampled through the symmetric square root of Sigma_X.
Matrix gen_predictors(const SimSpec& spec);

/// n x q noise matrix, rows iid N(0, Sigma_N) with Sigma_N[i][j] =
/// sigma_n^2 * 0.4^|j-i|.
Matrix gen_noise(const SimSpec& spec);

struct Coefficients {
    Matrix a;  // p x m, exactly m0 nonzeros per row
    Matrix b;  // m x q, standard normals masked Bernoulli(s)
    Matrix d;  // a * b
};
/// Factor-structure coefficient draw. Requires FactorStructure.
Coefficients gen_coefficients(const SimSpec& spec);

/// Unstructured coefficient draw for the ElementwiseSparse / RowwiseSparse
/// regimes.
Matrix gen_unstructured_d(const SimSpec& spec);

struct SimData {
    Matrix x;
    Matrix y;
    Matrix d;
    std::optional<Matrix> a;  // factor structure only
    std::optional<Matrix> b;
};
/// Full dataset: X, D per the structure, Y = X*D + E.
SimData generate(const SimSpec& spec);

/// ||X_test * D_hat - Y_test||_F^2 / (n_test * q)
double mse(const Matrix& x_test, const Matrix& y_test, const Matrix& d_hat);

/// Fraction of truly nonzero coefficients recovered with the correct sign.
/// Throws UndefinedMetric if D_true has no nonzeros.
double signed_sensitivity(const Matrix& d_true, const Matrix& d_hat);

/// Fraction of truly zero coefficients estimated as exactly zero. Throws
/// UndefinedMetric if D_true has no zeros.
double specificity(const Matrix& d_true, const Matrix& d_hat);

/// Per-response l1 regression: q independent lassos with design Xn.
Matrix lasso_baseline(const Matrix& xn, const Matrix& yc, double lambda,
                      const InnerSolveOptions& opts = {});

/// Solves (X'X + lambda*I) D = X'Y. Throws SingularSystem when lambda = 0 and
/// X'X is rank deficient.
Matrix ridge_baseline(const Matrix& xn, const Matrix& yc, double lambda);

enum class Algorithm { Smfr, Lasso, Ridge };
std::string algorithm_name(Algorithm alg);

struct EvalReport {
    double mse{0.0};
    double signed_sensitivity{0.0};
    double specificity{0.0};
    std::optional<Index> m_hat;  // SMFR only
};

struct RegimeConfig {
    int n_runs{20};
    Index r{20};
    Index test_n{0};  // held-out rows per run; 0 -> same as the training size
    int cv_folds{5};
    std::vector<Penalties> smfr_grid;  // empty -> default_grid on each run's data
    // interpret smfr_grid lambda1/lambda2 as multiples of ||Xn'Yc||_inf of each
    // run's training data (lambda3 stays absolute)
    bool smfr_grid_relative{false};
    std::vector<double> lasso_grid;    // empty -> data-driven log grid
    std::vector<double> ridge_grid;    // empty -> data-driven log grid
    SolverConfig solver;               // epsilon / scheme / caps for final fits
    double cv_epsilon{1e-4};           // looser tolerance inside CV folds
    int cv_max_iters{600};             // iteration budget inside CV folds
    RankPolicy policy;
    int threads{0};  // 0 -> hardware concurrency
};

struct AlgorithmSummary {
    Algorithm alg{Algorithm::Smfr};
    double mse_mean{0.0}, mse_sd{0.0};
    double sens_mean{0.0}, sens_sd{0.0};
    double spec_mean{0.0}, spec_sd{0.0};
    double m_hat_median{0.0}, m_hat_mean{0.0}, m_hat_sd{0.0};  // SMFR only
    std::vector<EvalReport> runs;
};

struct RegimeResult {
    SimSpec spec;
    std::vector<AlgorithmSummary> summaries;  // one per requested algorithm
    std::vector<int> failed_runs;
};

/// The synthetic benchmark protocol: per seeded run, draws fresh train and
/// test sets sharing one coefficient matrix, fits each requested algorithm
/// with CV-selected penalties on the training set, and evaluates MSE plus
/// support metrics on the test set (same size as training). Runs execute
/// concurrently; per-run RNG streams derive from (spec.seed, run index) so
/// results are independent of scheduling.
RegimeResult run_regime(const SimSpec& spec, const std::vector<Algorithm>& algorithms,
                        const RegimeConfig& config);

}  // namespace smfr
