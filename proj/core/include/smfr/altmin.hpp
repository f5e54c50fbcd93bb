#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "smfr/objective.hpp"
#include "smfr/subsolvers.hpp"
#include "smfr/types.hpp"

namespace smfr {

/// Exact block minimization via the inner coordinate-descent solvers.
struct BasicScheme {};

/// Block minimization with added viscosity terms beta*||B - B_i||_F^2 and
/// alpha*||A - A_i||_F^2. Multipliers are held constant; bounds below.
struct ProximalScheme {
    double alpha{1.0};
    double beta{1.0};
    static constexpr double kMinMultiplier = 1e-4;
    static constexpr double kMaxMultiplier = 1e4;
};

/// Soft-thresholded gradient steps with Lipschitz stepsizes and capped
/// extrapolation; sub-steps are redone without extrapolation on non-descent.
struct ProxLinearScheme {
    double delta_omega{0.99};  // must be < 1
};

using UpdateScheme = std::variant<BasicScheme, ProximalScheme, ProxLinearScheme>;

struct RandomNormalInit {};
struct MatrixInit {
    Matrix a0;
    Matrix b0;
};
using InitStrategy = std::variant<RandomNormalInit, MatrixInit>;

struct SolverConfig {
    UpdateScheme scheme{ProxLinearScheme{}};
    double epsilon{1e-5};  // stop when |f_i - f_{i+1}| / f_i < epsilon
    int max_outer_iters{2000};
    std::uint64_t seed{0};
    InitStrategy init{RandomNormalInit{}};
    InnerSolveOptions inner{};
    // termination contracts certified on top of the relative-f rule: the last
    // step must satisfy ||dA|| + ||dB|| <= step_tol * (||A|| + ||B||), and the
    // basic scheme must reach both block KKT residuals <= partial_opt_tol
    double step_tol{1e-4};
    double partial_opt_tol{1e-6};
};

enum class Termination { Converged, IterationCap, PerfectFit };

struct IterationRecord {
    double f{0.0};                   // objective after the full iteration
    std::optional<double> f_half;    // after the B update (basic/proximal only)
    double step_a{0.0};              // ||A_{i+1} - A_i||_F
    double step_b{0.0};              // ||B_{i+1} - B_i||_F
    double alpha{0.0};               // multiplier used for the A sub-step
    double beta{0.0};                // multiplier used for the B sub-step
    double omega_a{0.0};
    double omega_b{0.0};
    bool restarted{false};           // prox-linear non-descent redo
    bool inner_converged{true};
};

struct FitTrace {
    double f_initial{0.0};
    std::vector<IterationRecord> iterations;
    Termination termination{Termination::Converged};
};

struct FitResult {
    Matrix a_hat;
    Matrix b_hat;
    FitTrace trace;
};

/// Mutable state of one alternating-minimization run. Holds borrowed views of
/// the (preprocessed) data, the Gram precomputations shared by every update
/// scheme, and the extrapolation history. The step_* functions advance it by
/// one outer iteration.
struct AltMinState {
    AltMinState(const Matrix& xn, const Matrix& yc, Matrix a0, Matrix b0, Penalties pen,
                InnerSolveOptions inner);

    const Matrix* x;
    const Matrix* y;
    Matrix s;           // X'X
    Matrix t;           // X'Y
    double y_sqnorm;
    double s_fnorm;     // ||X'X||_F == ||XX'||_F
    Penalties pen;
    InnerSolveOptions inner;

    Matrix a, b;
    Matrix a_prev, b_prev;
    double f;           // objective at (a, b)
    int iter{0};

    // prox-linear extrapolation history
    double t_momentum{1.0};
    double prev_alpha{-1.0};
    double prev_beta{-1.0};
};

IterationRecord step_basic(AltMinState& state);
IterationRecord step_proximal(AltMinState& state, double alpha, double beta);
IterationRecord step_proxlinear(AltMinState& state, double delta_omega);

/// Momentum recurrence t_i = (1 + sqrt(1 + 4 t_{i-1}^2)) / 2, t_0 = 1.
inline double momentum_t_next(double t_prev) {
    return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
}

/// A0 with iid standard-normal entries from the given seed; B0 = 0 (the first
/// half-step overwrites B).
std::pair<Matrix, Matrix> init_random(Index p, Index m, Index q, std::uint64_t seed);

/// Factor initialization from the SVD of a baseline coefficient matrix:
/// A0 = U_{1:m} S_{1:m}, B0 = (V')_{1:m}. If the baseline has fewer than m
/// numerically nonzero singular values, the missing A0 columns are filled
/// with the random init (B0 rows zero); an all-zero baseline throws
/// RankDeficientBaseline.
std::pair<Matrix, Matrix> init_from_baseline(const Matrix& d_baseline, Index m,
                                             std::uint64_t seed = 0);

/// Alternates the configured B and A updates until the relative change of f
/// drops below config.epsilon or the iteration cap is reached. Inputs are
/// expected preprocessed (X normalized, Y centered). Requires lambda3 > 0 and
/// a nonzero A0.
FitResult fit_fixed_m(const Matrix& xn, const Matrix& yc, Index m, const Penalties& pen,
                      const SolverConfig& config);

}  // namespace smfr
