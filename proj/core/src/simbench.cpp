#include "smfr/simbench.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "smfr/preprocess.hpp"
#include "smfr/rng.hpp"
#include "parallel_util.hpp"

namespace smfr {

namespace {

// substream tags for the per-spec generators
constexpr std::uint64_t kTagPredictors = 0x5853;
constexpr std::uint64_t kTagNoise = 0x4E53;
constexpr std::uint64_t kTagCoefficients = 0xC0EF;
constexpr std::uint64_t kTagUnstructured = 0xD000;
constexpr std::uint64_t kTagTestSet = 0x7E57;
constexpr std::uint64_t kTagRun = 0x52554E;
constexpr std::uint64_t kTagCvFolds = 0xCF01D;

/// Symmetric square root of the AR(1) covariance rho^|i-j|.
Matrix ar1_sqrt(Index size, double rho) {
    Matrix sigma(size, size);
    for (Index i = 0; i < size; ++i)
        for (Index j = 0; j < size; ++j) sigma(i, j) = std::pow(rho, std::abs(i - j));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
    const Vector lambda = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

double sample_sd(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double sample_mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::vector<double> default_lasso_grid(const Matrix& xn, const Matrix& yc) {
    const double lmax = (xn.transpose() * yc).cwiseAbs().maxCoeff();
    return {0.5 * lmax, 0.3 * lmax, 0.2 * lmax, 0.1 * lmax, 0.05 * lmax, 0.02 * lmax};
}

std::vector<double> default_ridge_grid() { return {1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0}; }

}  // namespace

void SimSpec::validate() const {
    if (n < 2 || p < 1 || q < 1) throw InvalidConfig("SimSpec: need n >= 2, p, q >= 1");
    if (std::holds_alternative<FactorStructure>(structure)) {
        if (m < 1 || m > std::min(p, q))
            throw InvalidConfig("SimSpec: m must lie in [1, min(p, q)]");
        if (m0 < 1 || m0 > m) throw InvalidConfig("SimSpec: m0 must lie in [1, m]");
        if (!(s > 0) || s > 1) throw InvalidConfig("SimSpec: s must lie in (0, 1]");
    } else if (const auto* ew = std::get_if<ElementwiseSparse>(&structure)) {
        if (!(ew->density > 0) || ew->density > 1)
            throw InvalidConfig("SimSpec: density must lie in (0, 1]");
    } else if (const auto* rw = std::get_if<RowwiseSparse>(&structure)) {
        if (rw->zero_row_frac < 0 || rw->zero_row_frac >= 1)
            throw InvalidConfig("SimSpec: zero_row_frac must lie in [0, 1)");
        if (!(rw->within_density > 0) || rw->within_density > 1)
            throw InvalidConfig("SimSpec: within_density must lie in (0, 1]");
    }
    if (sigma_n < 0) throw InvalidConfig("SimSpec: sigma_n must be nonnegative");
}

Matrix gen_predictors(const SimSpec& spec) {
    spec.validate();
    Rng rng = make_rng(derive_seed(spec.seed, kTagPredictors));
    const Matrix z = random_normal(spec.n, spec.p, rng);
    return z * ar1_sqrt(spec.p, 0.7);
}

Matrix gen_noise(const SimSpec& spec) {
    spec.validate();
    Rng rng = make_rng(derive_seed(spec.seed, kTagNoise));
    const Matrix z = random_normal(spec.n, spec.q, rng);
    return spec.sigma_n * (z * ar1_sqrt(spec.q, 0.4));
}

Coefficients gen_coefficients(const SimSpec& spec) {
    spec.validate();
    if (!std::holds_alternative<FactorStructure>(spec.structure))
        throw InvalidConfig("gen_coefficients: spec must have factor structure");
    Rng rng = make_rng(derive_seed(spec.seed, kTagCoefficients));
    std::normal_distribution<double> normal(0.0, 1.0);

    Coefficients out;
    out.a = Matrix::Zero(spec.p, spec.m);
    std::vector<Index> idx(static_cast<std::size_t>(spec.m));
    for (Index i = 0; i < spec.p; ++i) {
        std::iota(idx.begin(), idx.end(), Index{0});
        for (Index t = 0; t < spec.m0; ++t) {
            const Index j =
                t + std::uniform_int_distribution<Index>(0, spec.m - 1 - t)(rng);
            std::swap(idx[t], idx[j]);
            out.a(i, idx[t]) = normal(rng);
        }
    }

    out.b = Matrix::Zero(spec.m, spec.q);
    for (Index i = 0; i < spec.m; ++i)
        for (Index j = 0; j < spec.q; ++j) {
            const double u = normal(rng);
            if (uniform01(rng) < spec.s) out.b(i, j) = u;
        }

    out.d = out.a * out.b;
    return out;
}

Matrix gen_unstructured_d(const SimSpec& spec) {
    spec.validate();
    Rng rng = make_rng(derive_seed(spec.seed, kTagUnstructured));
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix d = Matrix::Zero(spec.p, spec.q);

    if (const auto* ew = std::get_if<ElementwiseSparse>(&spec.structure)) {
        for (Index i = 0; i < spec.p; ++i)
            for (Index j = 0; j < spec.q; ++j)
                if (uniform01(rng) < ew->density) d(i, j) = normal(rng);
        return d;
    }
    if (const auto* rw = std::get_if<RowwiseSparse>(&spec.structure)) {
        const Index n_zero = static_cast<Index>(
            std::llround(rw->zero_row_frac * static_cast<double>(spec.p)));
        std::vector<Index> rows(static_cast<std::size_t>(spec.p));
        std::iota(rows.begin(), rows.end(), Index{0});
        for (Index t = 0; t < n_zero; ++t) {
            const Index j =
                t + std::uniform_int_distribution<Index>(0, spec.p - 1 - t)(rng);
            std::swap(rows[t], rows[j]);
        }
        std::vector<bool> zeroed(static_cast<std::size_t>(spec.p), false);
        for (Index t = 0; t < n_zero; ++t) zeroed[rows[t]] = true;
        for (Index i = 0; i < spec.p; ++i) {
            if (zeroed[i]) continue;
            for (Index j = 0; j < spec.q; ++j)
                if (uniform01(rng) < rw->within_density) d(i, j) = normal(rng);
        }
        return d;
    }
    throw InvalidConfig("gen_unstructured_d: spec must be element- or row-wise sparse");
}

SimData generate(const SimSpec& spec) {
    SimData data;
    data.x = gen_predictors(spec);
    if (std::holds_alternative<FactorStructure>(spec.structure)) {
        Coefficients coef = gen_coefficients(spec);
        data.d = std::move(coef.d);
        data.a = std::move(coef.a);
        data.b = std::move(coef.b);
    } else {
        data.d = gen_unstructured_d(spec);
    }
    data.y = data.x * data.d + gen_noise(spec);
    return data;
}

double mse(const Matrix& x_test, const Matrix& y_test, const Matrix& d_hat) {
    require_same_rows(x_test, y_test, "mse");
    if (x_test.cols() != d_hat.rows() || d_hat.cols() != y_test.cols())
        throw ShapeMismatch("mse: coefficient matrix does not conform");
    return (x_test * d_hat - y_test).squaredNorm() /
           static_cast<double>(y_test.rows() * y_test.cols());
}

double signed_sensitivity(const Matrix& d_true, const Matrix& d_hat) {
    if (d_true.rows() != d_hat.rows() || d_true.cols() != d_hat.cols())
        throw ShapeMismatch("signed_sensitivity: shapes differ");
    Index nonzero = 0, hits = 0;
    for (Index j = 0; j < d_true.cols(); ++j)
        for (Index i = 0; i < d_true.rows(); ++i) {
            if (d_true(i, j) == 0.0) continue;
            ++nonzero;
            if (d_true(i, j) * d_hat(i, j) > 0.0) ++hits;
        }
    if (nonzero == 0)
        throw UndefinedMetric("signed_sensitivity: true matrix has no nonzeros");
    return static_cast<double>(hits) / static_cast<double>(nonzero);
}

double specificity(const Matrix& d_true, const Matrix& d_hat) {
    if (d_true.rows() != d_hat.rows() || d_true.cols() != d_hat.cols())
        throw ShapeMismatch("specificity: shapes differ");
    Index zeros = 0, hits = 0;
    for (Index j = 0; j < d_true.cols(); ++j)
        for (Index i = 0; i < d_true.rows(); ++i) {
            if (d_true(i, j) != 0.0) continue;
            ++zeros;
            if (d_hat(i, j) == 0.0) ++hits;
        }
    if (zeros == 0) throw UndefinedMetric("specificity: true matrix has no zeros");
    return static_cast<double>(hits) / static_cast<double>(zeros);
}

Matrix lasso_baseline(const Matrix& xn, const Matrix& yc, double lambda,
                      const InnerSolveOptions& opts) {
    if (lambda < 0) throw InvalidConfig("lasso_baseline: lambda must be nonnegative");
    return lasso_columns(xn, yc, lambda, opts).first;
}

Matrix ridge_baseline(const Matrix& xn, const Matrix& yc, double lambda) {
    require_same_rows(xn, yc, "ridge_baseline");
    if (lambda < 0) throw InvalidConfig("ridge_baseline: lambda must be nonnegative");
    const Index p = xn.cols();
    Matrix gram = xn.transpose() * xn;
    if (lambda == 0.0) {
        Eigen::FullPivLU<Matrix> lu(gram);
        if (lu.rank() < p)
            throw SingularSystem("ridge_baseline: X'X is singular and lambda = 0");
        return lu.solve(xn.transpose() * yc);
    }
    gram.diagonal().array() += lambda;
    return Eigen::LLT<Matrix>(gram).solve(xn.transpose() * yc);
}

std::string algorithm_name(Algorithm alg) {
    switch (alg) {
        case Algorithm::Smfr: return "smfr";
        case Algorithm::Lasso: return "lasso";
        case Algorithm::Ridge: return "ridge";
    }
    return "unknown";
}

RegimeResult run_regime(const SimSpec& spec, const std::vector<Algorithm>& algorithms,
                        const RegimeConfig& config) {
    spec.validate();
    if (config.n_runs < 1) throw InvalidConfig("run_regime: n_runs must be at least 1");
    if (algorithms.empty()) throw InvalidConfig("run_regime: no algorithms requested");

    struct RunOutput {
        std::vector<EvalReport> reports;  // aligned with `algorithms`
        bool failed{false};
    };
    std::vector<RunOutput> outputs(static_cast<std::size_t>(config.n_runs));

    detail::parallel_for_index(
        outputs.size(), config.threads, [&](std::size_t run) {
            SimSpec train_spec = spec;
            train_spec.seed = derive_seed(spec.seed, kTagRun + run);
            SimSpec test_spec = train_spec;
            test_spec.seed = derive_seed(train_spec.seed, kTagTestSet);
            if (config.test_n > 0) test_spec.n = config.test_n;

            try {
                const SimData train = generate(train_spec);
                const Matrix x_test = gen_predictors(test_spec);
                const Matrix y_test = x_test * train.d + gen_noise(test_spec);

                const Preprocessed pre = center_and_normalize(train.x, train.y);
                const std::uint64_t run_seed = train_spec.seed;

                RunOutput& out = outputs[run];
                out.reports.resize(algorithms.size());
                for (std::size_t ai = 0; ai < algorithms.size(); ++ai) {
                    const Algorithm alg = algorithms[ai];
                    Matrix d_norm;
                    std::optional<Index> m_hat;
                    if (alg == Algorithm::Smfr) {
                        SolverConfig cv_cfg = config.solver;
                        cv_cfg.seed = derive_seed(run_seed, 11);
                        cv_cfg.epsilon = config.cv_epsilon;
                        cv_cfg.max_outer_iters =
                            std::min(config.cv_max_iters, config.solver.max_outer_iters);
                        std::vector<Penalties> grid = config.smfr_grid.empty()
                                                          ? default_grid(pre.x, pre.y)
                                                          : config.smfr_grid;
                        if (config.smfr_grid_relative && !config.smfr_grid.empty()) {
                            const double lmax =
                                (pre.x.transpose() * pre.y).cwiseAbs().maxCoeff();
                            for (Penalties& pen : grid) {
                                pen.lambda1 *= lmax;
                                pen.lambda2 *= lmax;
                            }
                        }
                        const CvResult cv = cv_select(pre.x, pre.y, config.r, grid,
                                                      config.cv_folds, cv_cfg,
                                                      config.policy);
                        SolverConfig fit_cfg = config.solver;
                        fit_cfg.seed = derive_seed(run_seed, 12);
                        const SelectResult sel =
                            select_factors(pre.x, pre.y, config.r, cv.best, fit_cfg,
                                           config.policy, &pre.stats);
                        d_norm = sel.model.a_hat * sel.model.b_hat;
                        m_hat = sel.model.m_hat;
                    } else if (alg == Algorithm::Lasso) {
                        const std::vector<double> grid = config.lasso_grid.empty()
                                                             ? default_lasso_grid(pre.x, pre.y)
                                                             : config.lasso_grid;
                        const ScalarCvResult cv = cv_select_scalar(
                            pre.x, pre.y, grid, config.cv_folds,
                            derive_seed(run_seed, kTagCvFolds),
                            [&](const Matrix& xt, const Matrix& yt, double l) {
                                return lasso_baseline(xt, yt, l, config.solver.inner);
                            });
                        d_norm = lasso_baseline(pre.x, pre.y, cv.best, config.solver.inner);
                    } else {
                        const std::vector<double> grid = config.ridge_grid.empty()
                                                             ? default_ridge_grid()
                                                             : config.ridge_grid;
                        const ScalarCvResult cv = cv_select_scalar(
                            pre.x, pre.y, grid, config.cv_folds,
                            derive_seed(run_seed, kTagCvFolds),
                            [](const Matrix& xt, const Matrix& yt, double l) {
                                return ridge_baseline(xt, yt, l);
                            });
                        d_norm = ridge_baseline(pre.x, pre.y, cv.best);
                    }

                    // back to the raw predictor scale
                    Matrix d_hat = d_norm;
                    d_hat.array().colwise() /= pre.stats.x_norms.array();

                    EvalReport& rep = out.reports[ai];
                    rep.mse = mse(x_test, y_test, d_hat);
                    rep.signed_sensitivity = signed_sensitivity(train.d, d_hat);
                    rep.specificity = specificity(train.d, d_hat);
                    rep.m_hat = m_hat;
                }
            } catch (const Error&) {
                outputs[run].failed = true;
            }
        });

    RegimeResult result;
    result.spec = spec;
    for (std::size_t run = 0; run < outputs.size(); ++run)
        if (outputs[run].failed) result.failed_runs.push_back(static_cast<int>(run));

    for (std::size_t ai = 0; ai < algorithms.size(); ++ai) {
        AlgorithmSummary summary;
        summary.alg = algorithms[ai];
        std::vector<double> mses, senss, specs, mhats;
        for (const RunOutput& out : outputs) {
            if (out.failed) continue;
            const EvalReport& rep = out.reports[ai];
            summary.runs.push_back(rep);
            mses.push_back(rep.mse);
            senss.push_back(rep.signed_sensitivity);
            specs.push_back(rep.specificity);
            if (rep.m_hat) mhats.push_back(static_cast<double>(*rep.m_hat));
        }
        summary.mse_mean = sample_mean(mses);
        summary.mse_sd = sample_sd(mses, summary.mse_mean);
        summary.sens_mean = sample_mean(senss);
        summary.sens_sd = sample_sd(senss, summary.sens_mean);
        summary.spec_mean = sample_mean(specs);
        summary.spec_sd = sample_sd(specs, summary.spec_mean);
        if (!mhats.empty()) {
            summary.m_hat_median = median_of(mhats);
            summary.m_hat_mean = sample_mean(mhats);
            summary.m_hat_sd = sample_sd(mhats, summary.m_hat_mean);
        }
        result.summaries.push_back(std::move(summary));
    }
    return result;
}

}  // namespace smfr
