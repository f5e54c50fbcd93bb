#include "smfr/altmin.hpp"

#include <cmath>

#include "smfr/rng.hpp"

namespace smfr {

namespace {

double beta_floor(const AltMinState& state) { return 1e-8 * (1.0 + state.s_fnorm); }

void validate_scheme(const UpdateScheme& scheme) {
    if (const auto* prox = std::get_if<ProximalScheme>(&scheme)) {
        if (prox->alpha < ProximalScheme::kMinMultiplier ||
            prox->alpha > ProximalScheme::kMaxMultiplier ||
            prox->beta < ProximalScheme::kMinMultiplier ||
            prox->beta > ProximalScheme::kMaxMultiplier)
            throw InvalidConfig("proximal multipliers must lie in [1e-4, 1e4]");
    } else if (const auto* pl = std::get_if<ProxLinearScheme>(&scheme)) {
        if (!(pl->delta_omega > 0) || !(pl->delta_omega < 1))
            throw InvalidConfig("delta_omega must lie in (0, 1)");
    }
}

}  // namespace

AltMinState::AltMinState(const Matrix& xn, const Matrix& yc, Matrix a0, Matrix b0,
                         Penalties pen_, InnerSolveOptions inner_)
    : x(&xn),
      y(&yc),
      s(xn.transpose() * xn),
      t(xn.transpose() * yc),
      y_sqnorm(yc.squaredNorm()),
      s_fnorm(0.0),
      pen(pen_),
      inner(inner_),
      a(std::move(a0)),
      b(std::move(b0)) {
    require_same_rows(xn, yc, "AltMinState");
    if (a.rows() != xn.cols() || a.cols() != b.rows() || b.cols() != yc.cols())
        throw ShapeMismatch("AltMinState: A0/B0 shapes do not conform with the data");
    s_fnorm = s.norm();  // ||X'X||_F equals ||XX'||_F
    f = objective(*x, *y, a, b, pen);
    a_prev = a;
    b_prev = b;
}

IterationRecord step_basic(AltMinState& st) {
    IterationRecord rec;
    const Matrix g = st.a.transpose() * (st.s * st.a);
    const Matrix hty = st.a.transpose() * st.t;

    SubsolveExtras warm_b{&st.b, nullptr, 0.0};
    auto [b_new, rep_b] =
        lasso_columns_gram(g, hty, st.y_sqnorm, st.pen.lambda2, st.inner, warm_b);
    rec.f_half = objective(*st.x, *st.y, st.a, b_new, st.pen);

    SubsolveExtras warm_a{&st.a, nullptr, 0.0};
    auto [a_new, rep_a] = elastic_net_a_gram(st.s, st.t, st.y_sqnorm, b_new,
                                             st.pen.lambda1, st.pen.lambda3, st.inner,
                                             warm_a);
    rec.f = objective(*st.x, *st.y, a_new, b_new, st.pen);
    rec.step_a = (a_new - st.a).norm();
    rec.step_b = (b_new - st.b).norm();
    rec.inner_converged = rep_b.converged && rep_a.converged;

    st.a_prev = std::move(st.a);
    st.b_prev = std::move(st.b);
    st.a = std::move(a_new);
    st.b = std::move(b_new);
    st.f = rec.f;
    ++st.iter;
    return rec;
}

IterationRecord step_proximal(AltMinState& st, double alpha, double beta) {
    if (!(alpha > 0) || !(beta > 0))
        throw InvalidConfig("proximal multipliers must be positive");
    IterationRecord rec;
    rec.alpha = alpha;
    rec.beta = beta;

    const Matrix g = st.a.transpose() * (st.s * st.a);
    const Matrix hty = st.a.transpose() * st.t;

    SubsolveExtras ext_b{&st.b, &st.b, beta};
    auto [b_new, rep_b] =
        lasso_columns_gram(g, hty, st.y_sqnorm, st.pen.lambda2, st.inner, ext_b);
    rec.f_half = objective(*st.x, *st.y, st.a, b_new, st.pen);

    SubsolveExtras ext_a{&st.a, &st.a, alpha};
    auto [a_new, rep_a] = elastic_net_a_gram(st.s, st.t, st.y_sqnorm, b_new,
                                             st.pen.lambda1, st.pen.lambda3, st.inner,
                                             ext_a);
    rec.f = objective(*st.x, *st.y, a_new, b_new, st.pen);
    rec.step_a = (a_new - st.a).norm();
    rec.step_b = (b_new - st.b).norm();
    rec.inner_converged = rep_b.converged && rep_a.converged;

    st.a_prev = std::move(st.a);
    st.b_prev = std::move(st.b);
    st.a = std::move(a_new);
    st.b = std::move(b_new);
    st.f = rec.f;
    ++st.iter;
    return rec;
}

IterationRecord step_proxlinear(AltMinState& st, double delta_omega) {
    if (!(delta_omega < 1)) throw InvalidConfig("delta_omega must be < 1");
    IterationRecord rec;

    const double t_prev = st.t_momentum;
    const double t_cur = momentum_t_next(t_prev);
    const double omega_t = (t_prev - 1.0) / t_cur;
    const bool has_history = st.iter > 0 && st.prev_alpha > 0 && st.prev_beta > 0;

    const Matrix big_m = st.a.transpose() * (st.s * st.a);  // A' X'X A
    const Matrix att = st.a.transpose() * st.t;             // A' X'Y
    double beta_i = big_m.norm();
    if (beta_i == 0.0) beta_i = beta_floor(st);  // A = 0 degenerates the Lipschitz bound

    double omega_b =
        has_history
            ? std::min(omega_t, delta_omega * std::sqrt(st.prev_beta / beta_i))
            : 0.0;
    Matrix b_til = st.b + omega_b * (st.b - st.b_prev);
    Matrix b_new =
        soft_threshold(b_til - (big_m * b_til - att) / beta_i, st.pen.lambda2 / beta_i);

    Matrix w = b_new * b_new.transpose();
    double alpha_i = st.s_fnorm * w.norm() + 2.0 * st.pen.lambda3;
    double omega_a =
        has_history
            ? std::min(omega_t, delta_omega * std::sqrt(st.prev_alpha / alpha_i))
            : 0.0;
    Matrix a_til = st.a + omega_a * (st.a - st.a_prev);
    Matrix h = st.s * (a_til * w) - st.t * b_new.transpose() + 2.0 * st.pen.lambda3 * a_til;
    Matrix a_new = soft_threshold(a_til - h / alpha_i, st.pen.lambda1 / alpha_i);

    double f_new = objective(*st.x, *st.y, a_new, b_new, st.pen);
    bool restarted = false;
    if (f_new >= st.f) {
        // no descent: repeat both sub-steps without extrapolation
        restarted = true;
        omega_a = omega_b = 0.0;
        b_new = soft_threshold(st.b - (big_m * st.b - att) / beta_i,
                               st.pen.lambda2 / beta_i);
        w = b_new * b_new.transpose();
        alpha_i = st.s_fnorm * w.norm() + 2.0 * st.pen.lambda3;
        h = st.s * (st.a * w) - st.t * b_new.transpose() + 2.0 * st.pen.lambda3 * st.a;
        a_new = soft_threshold(st.a - h / alpha_i, st.pen.lambda1 / alpha_i);
        f_new = objective(*st.x, *st.y, a_new, b_new, st.pen);
    }

    rec.f = f_new;
    rec.step_a = (a_new - st.a).norm();
    rec.step_b = (b_new - st.b).norm();
    rec.alpha = alpha_i;
    rec.beta = beta_i;
    rec.omega_a = omega_a;
    rec.omega_b = omega_b;
    rec.restarted = restarted;

    st.t_momentum = t_cur;
    st.prev_alpha = alpha_i;
    st.prev_beta = beta_i;
    st.a_prev = std::move(st.a);
    st.b_prev = std::move(st.b);
    st.a = std::move(a_new);
    st.b = std::move(b_new);
    st.f = f_new;
    ++st.iter;
    return rec;
}

std::pair<Matrix, Matrix> init_random(Index p, Index m, Index q, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return {random_normal(p, m, rng), Matrix::Zero(m, q)};
}

std::pair<Matrix, Matrix> init_from_baseline(const Matrix& d_baseline, Index m,
                                             std::uint64_t seed) {
    const Index p = d_baseline.rows();
    const Index q = d_baseline.cols();
    if (m < 1 || m > std::min(p, q))
        throw InvalidConfig("init_from_baseline: m must lie in [1, min(p, q)]");
    if (d_baseline.isZero(0.0))
        throw RankDeficientBaseline("baseline coefficient matrix is zero");

    Eigen::BDCSVD<Matrix> svd(d_baseline, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-12 * sv(0)) ++rank;
    if (rank == 0) throw RankDeficientBaseline("baseline has no nonzero singular values");

    Matrix a0 = Matrix::Zero(p, m);
    Matrix b0 = Matrix::Zero(m, q);
    const Index keep = std::min(rank, m);
    for (Index k = 0; k < keep; ++k) {
        a0.col(k) = svd.matrixU().col(k) * sv(k);
        b0.row(k) = svd.matrixV().col(k).transpose();
    }
    if (keep < m) {
        // baseline rank short of m: pad the remaining factors randomly
        Rng rng = make_rng(derive_seed(seed, 0xba5e11c4ULL));
        for (Index k = keep; k < m; ++k)
            for (Index i = 0; i < p; ++i)
                a0(i, k) = std::normal_distribution<double>(0.0, 1.0)(rng);
    }
    return {std::move(a0), std::move(b0)};
}

FitResult fit_fixed_m(const Matrix& xn, const Matrix& yc, Index m, const Penalties& pen,
                      const SolverConfig& config) {
    pen.validate();
    if (!(pen.lambda3 > 0)) throw InvalidConfig("fit_fixed_m: lambda3 must be positive");
    if (m < 1) throw InvalidConfig("fit_fixed_m: m must be at least 1");
    if (!(config.epsilon > 0)) throw InvalidConfig("fit_fixed_m: epsilon must be positive");
    if (config.max_outer_iters < 1)
        throw InvalidConfig("fit_fixed_m: max_outer_iters must be at least 1");
    if (!(config.step_tol > 0) || !(config.partial_opt_tol > 0))
        throw InvalidConfig("fit_fixed_m: step_tol and partial_opt_tol must be positive");
    validate_scheme(config.scheme);

    Matrix a0, b0;
    if (const auto* given = std::get_if<MatrixInit>(&config.init)) {
        a0 = given->a0;
        b0 = given->b0;
        if (a0.rows() != xn.cols() || a0.cols() != m || b0.rows() != m ||
            b0.cols() != yc.cols())
            throw InvalidConfig("fit_fixed_m: supplied A0/B0 have wrong shapes");
    } else {
        std::tie(a0, b0) = init_random(xn.cols(), m, yc.cols(), config.seed);
    }
    if (a0.isZero(0.0)) throw InvalidConfig("fit_fixed_m: A0 must be nonzero");

    AltMinState state(xn, yc, std::move(a0), std::move(b0), pen, config.inner);
    FitTrace trace;
    trace.f_initial = state.f;
    trace.termination = Termination::IterationCap;

    const bool is_basic = std::holds_alternative<BasicScheme>(config.scheme);
    for (int it = 0; it < config.max_outer_iters; ++it) {
        if (state.f == 0.0) {
            trace.termination = Termination::PerfectFit;
            break;
        }
        const double f_before = state.f;
        IterationRecord rec = std::visit(
            [&](const auto& scheme) {
                using T = std::decay_t<decltype(scheme)>;
                if constexpr (std::is_same_v<T, BasicScheme>) return step_basic(state);
                else if constexpr (std::is_same_v<T, ProximalScheme>)
                    return step_proximal(state, scheme.alpha, scheme.beta);
                else
                    return step_proxlinear(state, scheme.delta_omega);
            },
            config.scheme);
        trace.iterations.push_back(rec);

        if (std::abs(f_before - state.f) / f_before >= config.epsilon) continue;
        if (rec.step_a + rec.step_b >
            config.step_tol * (state.a.norm() + state.b.norm()))
            continue;
        if (is_basic) {
            // certify the partial optimum before declaring convergence
            const Matrix g = state.a.transpose() * (state.s * state.a);
            const Matrix hty = state.a.transpose() * state.t;
            if (kkt_residual_b_gram(g, hty, state.b, pen.lambda2) >
                    config.partial_opt_tol ||
                kkt_residual_a_gram(state.s, state.t, state.a, state.b, pen.lambda1,
                                    pen.lambda3) > config.partial_opt_tol)
                continue;
        }
        trace.termination = Termination::Converged;
        break;
    }
    return {std::move(state.a), std::move(state.b), std::move(trace)};
}

}  // namespace smfr
