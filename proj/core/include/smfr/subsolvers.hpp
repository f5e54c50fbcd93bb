#pragma once

#include <utility>

#include "smfr/types.hpp"

namespace smfr {

struct InnerSolveOptions {
    double tol{1e-8};  // KKT residual target
    int max_sweeps{10000};
};

struct InnerSolveReport {
    int sweeps{0};
    double kkt_residual{0.0};
    double objective_value{0.0};
    bool converged{true};
};

/// Optional extras for the inner solvers: a warm start and a proximal term
/// weight*||M - anchor||_F^2 added to the subproblem (used by the proximal
/// update scheme). Pointers are borrowed and may be null.
struct SubsolveExtras {
    const Matrix* warm_start{nullptr};
    const Matrix* prox_anchor{nullptr};
    double prox_weight{0.0};
};

/// Solves min_B 0.5*||Y - H B||_F^2 + lambda2*||B||_1,1 by cyclic coordinate
/// descent, one independent lasso per response column. Returns the solution
/// and a report; report.converged is false if the sweep cap was reached with
/// KKT residual above tol.
std::pair<Matrix, InnerSolveReport> lasso_columns(const Matrix& h, const Matrix& y,
                                                  double lambda2,
                                                  const InnerSolveOptions& opts = {},
                                                  const SubsolveExtras& extras = {});

/// Gram-form entry point: g = H'H, hty = H'Y, y_sqnorm = ||Y||_F^2.
std::pair<Matrix, InnerSolveReport> lasso_columns_gram(const Matrix& g, const Matrix& hty,
                                                       double y_sqnorm, double lambda2,
                                                       const InnerSolveOptions& opts = {},
                                                       const SubsolveExtras& extras = {});

/// Solves min_A 0.5*||Y - X A B||_F^2 + lambda3*||A||_F^2 + lambda1*||A||_1,1
/// by cyclic coordinate descent over the entries of A. Requires lambda3 > 0
/// (strong convexity; the minimizer is unique).
std::pair<Matrix, InnerSolveReport> elastic_net_a(const Matrix& x, const Matrix& y,
                                                  const Matrix& b, double lambda1,
                                                  double lambda3,
                                                  const InnerSolveOptions& opts = {},
                                                  const SubsolveExtras& extras = {});

/// Gram-form entry point: s = X'X, t = X'Y, y_sqnorm = ||Y||_F^2.
std::pair<Matrix, InnerSolveReport> elastic_net_a_gram(const Matrix& s, const Matrix& t,
                                                       double y_sqnorm, const Matrix& b,
                                                       double lambda1, double lambda3,
                                                       const InnerSolveOptions& opts = {},
                                                       const SubsolveExtras& extras = {});

/// Maximum entrywise subgradient violation of the B subproblem at B:
/// |(H'(HB - Y))_kj + lambda2*sign(B_kj)| for nonzero entries,
/// max(|(H'(HB - Y))_kj| - lambda2, 0) for zero entries.
double kkt_residual_b(const Matrix& h, const Matrix& y, const Matrix& b, double lambda2);
double kkt_residual_b_gram(const Matrix& g, const Matrix& hty, const Matrix& b,
                           double lambda2);

/// Same certificate for the A subproblem (squared error + ridge + l1).
double kkt_residual_a(const Matrix& x, const Matrix& y, const Matrix& a, const Matrix& b,
                      double lambda1, double lambda3);
double kkt_residual_a_gram(const Matrix& s, const Matrix& t, const Matrix& a,
                           const Matrix& b, double lambda1, double lambda3);

}  // namespace smfr
