#pragma once

#include <vector>

#include "smfr/altmin.hpp"
#include "smfr/factor_select.hpp"
#include "smfr/types.hpp"

namespace smfr {

struct SpcaResult {
    Matrix components;                   // p x k: sparse loading matrix (A)
    Matrix contributions;                // k x p: regression of X on the scores (B)
    Vector adjusted_variance;            // k, fractions of total variance
    std::vector<Index> loading_nonzeros; // per component
    Vector loading_l1;                   // per-component l1 norm, for reporting
    FitTrace trace;
};

/// Fully sparse PCA: regresses centered X on itself with k latent components
/// via fit_fixed_m(Xn, Xn, k, ...). Both fitted matrices must reach numerical
/// rank k (components and contributions linearly independent); otherwise
/// throws RankCollapse.
SpcaResult fit_spca(const Matrix& xn, Index k, const Penalties& pen,
                    const SolverConfig& config, const RankPolicy& policy = {});

/// Variance explained by each component after sequentially projecting its
/// score onto the orthogonal complement of the earlier scores. Columns of A
/// are normalized first, so the result is invariant to their scale. Fractions
/// of ||Xn||_F^2; throws DependentComponents if a score lies in the span of
/// its predecessors.
Vector adjusted_explained_variance(const Matrix& xn, const Matrix& a);

/// Classical PCA loadings with all but the `keep` largest-magnitude entries
/// per component set to zero.
Matrix thresholding_baseline(const Matrix& xn, Index k, Index keep);

}  // namespace smfr
