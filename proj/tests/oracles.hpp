// Independent reference computations used to pin expected test values. These
// deliberately avoid the library's solver/gradient code paths: finite
// differences, exhaustive sign-pattern enumeration, and plain SVD.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "smfr/rng.hpp"
#include "smfr/types.hpp"

namespace oracles {

using smfr::Index;
using smfr::Matrix;
using smfr::Vector;

inline Matrix rand_matrix(Index rows, Index cols, std::uint64_t seed) {
    smfr::Rng rng = smfr::make_rng(seed);
    return smfr::random_normal(rows, cols, rng);
}

inline double smooth_part_b(const Matrix& x, const Matrix& y, const Matrix& a,
                            const Matrix& b) {
    return 0.5 * (y - x * a * b).squaredNorm();
}

inline double smooth_part_a(const Matrix& x, const Matrix& y, const Matrix& a,
                            const Matrix& b, double lambda3) {
    return 0.5 * (y - x * a * b).squaredNorm() + lambda3 * a.squaredNorm();
}

/// Central finite differences of 0.5*||Y - XAB||_F^2 in B.
inline Matrix fd_grad_b(const Matrix& x, const Matrix& y, const Matrix& a, Matrix b,
                        double h = 1e-6) {
    Matrix g(b.rows(), b.cols());
    for (Index i = 0; i < b.rows(); ++i)
        for (Index j = 0; j < b.cols(); ++j) {
            const double save = b(i, j);
            b(i, j) = save + h;
            const double fp = smooth_part_b(x, y, a, b);
            b(i, j) = save - h;
            const double fm = smooth_part_b(x, y, a, b);
            b(i, j) = save;
            g(i, j) = (fp - fm) / (2.0 * h);
        }
    return g;
}

/// Central finite differences of the smooth part (squared error + ridge) in A.
inline Matrix fd_grad_a(const Matrix& x, const Matrix& y, Matrix a, const Matrix& b,
                        double lambda3, double h = 1e-6) {
    Matrix g(a.rows(), a.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) {
            const double save = a(i, j);
            a(i, j) = save + h;
            const double fp = smooth_part_a(x, y, a, b, lambda3);
            a(i, j) = save - h;
            const double fm = smooth_part_a(x, y, a, b, lambda3);
            a(i, j) = save;
            g(i, j) = (fp - fm) / (2.0 * h);
        }
    return g;
}

inline double rel_error(const Matrix& got, const Matrix& want) {
    const double denom = std::max(want.norm(), 1e-12);
    return (got - want).norm() / denom;
}

/// Exhaustive minimizer of 0.5*b'Gb - c'b + ridge*||b||^2 + l1*||b||_1 over
/// up to ~3 coefficients, by enumerating the 3^k sign patterns and solving
/// the stationarity system restricted to each support.
inline Vector enumerate_l1_quadratic(const Matrix& g, const Vector& c, double l1,
                                     double ridge) {
    const Index k = g.rows();
    const Index patterns = static_cast<Index>(std::pow(3.0, static_cast<double>(k)));
    double best_val = std::numeric_limits<double>::infinity();
    Vector best = Vector::Zero(k);

    for (Index code = 0; code < patterns; ++code) {
        std::vector<int> sign(static_cast<std::size_t>(k));
        Index rem = code;
        for (Index i = 0; i < k; ++i) {
            sign[i] = static_cast<int>(rem % 3) - 1;  // -1, 0, +1
            rem /= 3;
        }
        std::vector<Index> support;
        for (Index i = 0; i < k; ++i)
            if (sign[i] != 0) support.push_back(i);

        Vector b = Vector::Zero(k);
        if (!support.empty()) {
            const Index ns = static_cast<Index>(support.size());
            Matrix gs(ns, ns);
            Vector rhs(ns);
            for (Index r = 0; r < ns; ++r) {
                rhs(r) = c(support[r]) - l1 * sign[support[r]];
                for (Index cc = 0; cc < ns; ++cc) gs(r, cc) = g(support[r], support[cc]);
            }
            gs.diagonal().array() += 2.0 * ridge;
            const Vector bs = gs.fullPivLu().solve(rhs);
            bool consistent = true;
            for (Index r = 0; r < ns; ++r) {
                if (bs(r) * sign[support[r]] <= 0) consistent = false;
                b(support[r]) = bs(r);
            }
            if (!consistent) continue;
        }
        // subgradient feasibility on the zero coordinates
        const Vector grad = g * b - c + 2.0 * ridge * b;
        bool feasible = true;
        for (Index i = 0; i < k; ++i)
            if (sign[i] == 0 && std::abs(grad(i)) > l1 + 1e-9) feasible = false;
        if (!feasible) continue;

        const double val = 0.5 * b.dot(g * b) - c.dot(b) + ridge * b.squaredNorm() +
                           l1 * b.lpNorm<1>();
        if (val < best_val) {
            best_val = val;
            best = b;
        }
    }
    return best;
}

/// First principal-component score of a centered matrix, straight from the SVD.
inline Vector pca_first_score(const Matrix& xc) {
    Eigen::BDCSVD<Matrix> svd(xc, Eigen::ComputeThinU);
    return svd.matrixU().col(0) * svd.singularValues()(0);
}

inline double pearson_corr(const Vector& a, const Vector& b) {
    const Vector ac = a.array() - a.mean();
    const Vector bc = b.array() - b.mean();
    return ac.dot(bc) / (ac.norm() * bc.norm());
}

}  // namespace oracles
