#include <doctest.h>

#include <Eigen/QR>

#include "oracles.hpp"
#include "smfr/objective.hpp"
#include "smfr/preprocess.hpp"
#include "smfr/subsolvers.hpp"

using namespace smfr;

namespace {

Matrix orthonormal_columns(Index n, Index m, std::uint64_t seed) {
    const Matrix raw = oracles::rand_matrix(n, m, seed);
    return Eigen::HouseholderQR<Matrix>(raw).householderQ() * Matrix::Identity(n, m);
}

}  // namespace

TEST_CASE("lasso fully shrinks once lambda2 reaches the correlation bound") {
    const Matrix h = oracles::rand_matrix(8, 3, 1);
    const Matrix y = oracles::rand_matrix(8, 2, 2);
    const double lmax = (h.transpose() * y).cwiseAbs().maxCoeff();
    const auto [b, rep] = lasso_columns(h, y, lmax * 1.000001);
    CHECK(b.isZero(0.0));
    CHECK(rep.converged);
}

TEST_CASE("lasso with orthonormal design matches the soft-threshold closed form") {
    const Matrix h = orthonormal_columns(10, 4, 3);
    const Matrix y = oracles::rand_matrix(10, 3, 4);
    const double lambda2 = 0.3;
    const auto [b, rep] = lasso_columns(h, y, lambda2);
    const Matrix expected = soft_threshold(Matrix(h.transpose() * y), lambda2);
    CHECK((b - expected).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(kkt_residual_b(h, y, b, lambda2) <= 1e-8);
}

TEST_CASE("lasso matches the sign-pattern enumeration oracle on m = 2 instances") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const Matrix h = oracles::rand_matrix(6, 2, 100 + seed);
        const Matrix y = oracles::rand_matrix(6, 1, 200 + seed);
        const double lambda2 = 0.05 + 0.1 * static_cast<double>(seed % 5);
        const auto [b, rep] = lasso_columns(h, y, lambda2);
        const Vector oracle = oracles::enumerate_l1_quadratic(
            h.transpose() * h, h.transpose() * y.col(0), lambda2, 0.0);
        CHECK((b.col(0) - oracle).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(rep.kkt_residual <= 1e-8);
    }
}

TEST_CASE("lasso solution is independent of the starting point") {
    const Matrix h = oracles::rand_matrix(12, 4, 5);
    const Matrix y = oracles::rand_matrix(12, 3, 6);
    const double lambda2 = 0.2;
    const auto [b_cold, r1] = lasso_columns(h, y, lambda2);
    const Matrix warm = oracles::rand_matrix(4, 3, 7);
    SubsolveExtras extras;
    extras.warm_start = &warm;
    const auto [b_warm, r2] = lasso_columns(h, y, lambda2, {}, extras);
    CHECK((b_cold - b_warm).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("lasso short-circuits a zero design") {
    const Matrix h = Matrix::Zero(5, 3);
    const Matrix y = oracles::rand_matrix(5, 2, 8);
    const auto [b, rep] = lasso_columns(h, y, 0.1);
    CHECK(b.isZero(0.0));
    CHECK(rep.converged);
    CHECK(rep.kkt_residual == 0.0);
}

TEST_CASE("lasso objective is nonincreasing across sweeps") {
    const Matrix h = oracles::rand_matrix(10, 5, 9);
    const Matrix y = oracles::rand_matrix(10, 1, 10);
    InnerSolveOptions opts;
    opts.tol = 1e-15;  // force the sweep cap to bind
    double prior = std::numeric_limits<double>::infinity();
    for (int cap = 1; cap <= 8; ++cap) {
        opts.max_sweeps = cap;
        const auto [b, rep] = lasso_columns(h, y, 0.05, opts);
        CHECK(rep.objective_value <= prior + 1e-12);
        prior = rep.objective_value;
    }
}

TEST_CASE("lasso flags non-convergence instead of throwing") {
    const Matrix h = oracles::rand_matrix(30, 10, 11);
    const Matrix y = oracles::rand_matrix(30, 1, 12);
    InnerSolveOptions opts;
    opts.tol = 1e-14;
    opts.max_sweeps = 1;
    const auto [b, rep] = lasso_columns(h, y, 0.01, opts);
    CHECK_FALSE(rep.converged);
    CHECK(rep.sweeps == 1);
}

TEST_CASE("elastic net with B = 0 returns A = 0") {
    const Matrix x = oracles::rand_matrix(6, 4, 13);
    const Matrix y = oracles::rand_matrix(6, 3, 14);
    const auto [a, rep] = elastic_net_a(x, y, Matrix::Zero(2, 3), 0.1, 0.5);
    CHECK(a.isZero(0.0));
    CHECK(rep.converged);
}

TEST_CASE("elastic net with lambda1 = 0 matches the ridge normal equations") {
    const Index n = 6, p = 3, m = 2, q = 2;
    const Matrix x = oracles::rand_matrix(n, p, 15);
    const Matrix y = oracles::rand_matrix(n, q, 16);
    const Matrix b = oracles::rand_matrix(m, q, 17);
    const double lambda3 = 0.4;
    const auto [a, rep] = elastic_net_a(x, y, b, 0.0, lambda3);

    // vectorized oracle: design kron(B', X), ridge via normal equations
    Matrix design(n * q, p * m);
    for (Index k = 0; k < m; ++k)
        for (Index j = 0; j < q; ++j)
            design.block(j * n, k * p, n, p) = b(k, j) * x;
    Vector yv(n * q);
    for (Index j = 0; j < q; ++j) yv.segment(j * n, n) = y.col(j);
    Matrix normal = design.transpose() * design;
    normal.diagonal().array() += 2.0 * lambda3;
    const Vector av = normal.ldlt().solve(design.transpose() * yv);
    Matrix a_oracle(p, m);
    for (Index k = 0; k < m; ++k) a_oracle.col(k) = av.segment(k * p, p);

    CHECK((a - a_oracle).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("elastic net matches the sign-pattern oracle on p=2, m=1 instances") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const Index n = 7, p = 2, m = 1, q = 2;
        const Matrix x = oracles::rand_matrix(n, p, 300 + seed);
        const Matrix y = oracles::rand_matrix(n, q, 400 + seed);
        const Matrix b = oracles::rand_matrix(m, q, 500 + seed);
        const double lambda1 = 0.05 + 0.07 * static_cast<double>(seed % 6);
        const double lambda3 = 0.2;
        const auto [a, rep] = elastic_net_a(x, y, b, lambda1, lambda3);

        Matrix design(n * q, p * m);
        for (Index k = 0; k < m; ++k)
            for (Index j = 0; j < q; ++j)
                design.block(j * n, k * p, n, p) = b(k, j) * x;
        Vector yv(n * q);
        for (Index j = 0; j < q; ++j) yv.segment(j * n, n) = y.col(j);
        const Vector oracle = oracles::enumerate_l1_quadratic(
            design.transpose() * design, design.transpose() * yv, lambda1, lambda3);

        CHECK((a.col(0) - oracle).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(rep.kkt_residual <= 1e-8);
        CHECK(kkt_residual_a(x, y, a, b, lambda1, lambda3) <= 1e-8);
    }
}

TEST_CASE("kkt residual is zero at the orthonormal closed form") {
    const Matrix h = orthonormal_columns(9, 3, 18);
    const Matrix y = oracles::rand_matrix(9, 2, 19);
    const double lambda2 = 0.25;
    const Matrix b = soft_threshold(Matrix(h.transpose() * y), lambda2);
    CHECK(kkt_residual_b(h, y, b, lambda2) <= 1e-10);
}

TEST_CASE("kkt residual of B = 0 under full shrinkage is exactly zero") {
    const Matrix h = oracles::rand_matrix(8, 3, 20);
    const Matrix y = oracles::rand_matrix(8, 2, 21);
    const double lmax = (h.transpose() * y).cwiseAbs().maxCoeff();
    CHECK(kkt_residual_b(h, y, Matrix::Zero(3, 2), lmax) == 0.0);
    CHECK(kkt_residual_b(h, y, Matrix::Zero(3, 2), 2.0 * lmax) == 0.0);
}

TEST_CASE("kkt residual grows monotonically with a perturbation of the optimum") {
    const Matrix h = orthonormal_columns(9, 3, 22);
    const Matrix y = oracles::rand_matrix(9, 1, 23);
    const double lambda2 = 0.1;
    Matrix b = soft_threshold(Matrix(h.transpose() * y), lambda2);
    REQUIRE(b.cwiseAbs().maxCoeff() > 0);
    Index inz = 0, jnz = 0;
    b.cwiseAbs().maxCoeff(&inz, &jnz);
    double prior = kkt_residual_b(h, y, b, lambda2);
    for (double delta : {1e-6, 1e-5, 1e-4, 1e-3}) {
        Matrix bp = b;
        bp(inz, jnz) += delta;
        const double res = kkt_residual_b(h, y, bp, lambda2);
        CHECK(res >= prior);
        prior = res;
    }
}

TEST_CASE("converged elastic net groups correlated features") {
    // two nearly identical predictors among noise, normalized columns
    Matrix x_raw = oracles::rand_matrix(40, 6, 24);
    x_raw.col(1) = x_raw.col(0) + 0.05 * oracles::rand_matrix(40, 1, 25);
    Matrix y_raw = oracles::rand_matrix(40, 4, 26);
    y_raw.col(0) += 2.0 * x_raw.col(0);
    const auto pre = center_and_normalize(x_raw, y_raw);

    const Matrix b = oracles::rand_matrix(3, 4, 27);
    const double lambda1 = 0.05, lambda3 = 0.3;
    const auto [a, rep] = elastic_net_a(pre.x, pre.y, b, lambda1, lambda3);
    REQUIRE(rep.converged);

    const double y_norm = pre.y.norm();
    for (Index k = 0; k < a.cols(); ++k) {
        const double bk_norm = b.row(k).norm();
        if (bk_norm == 0.0) continue;
        for (Index i = 0; i < a.rows(); ++i)
            for (Index j = 0; j < a.rows(); ++j) {
                if (i == j || a(i, k) * a(j, k) <= 0) continue;
                const double rho = pre.x.col(i).dot(pre.x.col(j));
                const double lhs = (2.0 * lambda3 / (y_norm * bk_norm)) *
                                   std::abs(a(i, k) - a(j, k));
                CHECK(lhs <= std::sqrt(std::max(2.0 * (1.0 - rho), 0.0)) + 1e-6);
            }
    }
}

TEST_CASE("subsolver input validation") {
    const Matrix x = oracles::rand_matrix(5, 3, 28);
    const Matrix y = oracles::rand_matrix(5, 2, 29);
    CHECK_THROWS_AS(elastic_net_a(x, y, Matrix::Zero(2, 2), 0.1, 0.0), InvalidConfig);
    CHECK_THROWS_AS(lasso_columns(x, oracles::rand_matrix(6, 2, 30), 0.1), ShapeMismatch);
    InnerSolveOptions opts;
    opts.tol = 0.0;
    CHECK_THROWS_AS(lasso_columns(x, y, 0.1, opts), InvalidConfig);
}
