#include "smfr/factor_select.hpp"

#include <Eigen/SVD>

#include "smfr/rng.hpp"

namespace smfr {

Index numerical_rank(const Matrix& m, const RankPolicy& policy) {
    if (m.size() == 0) throw ValidationError("numerical_rank: empty matrix");
    if (!(policy.rel_tol > 0) || !(policy.rel_tol < 1))
        throw InvalidConfig("numerical_rank: rel_tol must lie in (0, 1)");
    if (m.isZero(0.0)) return 0;
    Eigen::BDCSVD<Matrix> svd(m);
    const Vector& sv = svd.singularValues();
    if (sv.size() == 0 || !(sv(0) > 0)) return 0;
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > policy.rel_tol * sv(0)) ++rank;
    return rank;
}

SelectResult select_factors(const Matrix& xn, const Matrix& yc, Index r,
                            const Penalties& pen, const SolverConfig& config,
                            const RankPolicy& policy, const PreprocessStats* stats) {
    const Index p = xn.cols();
    const Index q = yc.cols();
    if (r < 1 || r > std::min(p, q))
        throw InvalidConfig("select_factors: r must lie in [1, min(p, q)]");

    SelectResult out;
    for (Index m = r; m >= 1; --m) {
        SolverConfig cfg = config;
        cfg.seed = derive_seed(config.seed, static_cast<std::uint64_t>(m));
        cfg.init = RandomNormalInit{};
        FitResult fit = fit_fixed_m(xn, yc, m, pen, cfg);

        SelectionAttempt attempt;
        attempt.m = m;
        attempt.rank_a = numerical_rank(fit.a_hat, policy);
        attempt.rank_b = numerical_rank(fit.b_hat, policy);
        attempt.trace = std::move(fit.trace);
        const bool full_rank = attempt.rank_a == m && attempt.rank_b == m;
        out.attempts.push_back(std::move(attempt));

        if (full_rank) {
            out.model.a_hat = std::move(fit.a_hat);
            out.model.b_hat = std::move(fit.b_hat);
            out.model.m_hat = m;
            out.model.penalties = pen;
            if (stats) {
                out.model.stats = *stats;
            } else {
                out.model.stats.x_means = Vector::Zero(p);
                out.model.stats.x_norms = Vector::Ones(p);
                out.model.stats.y_means = Vector::Zero(q);
            }
            return out;
        }
    }
    throw NoValidFactorCount(
        "no factor count in [1, " + std::to_string(r) +
        "] produced full-rank factor and loading matrices; lambda1/lambda2 are likely "
        "too large");
}

}  // namespace smfr
