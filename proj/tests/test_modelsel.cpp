#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "smfr/modelsel.hpp"
#include "smfr/preprocess.hpp"
#include "smfr/simbench.hpp"

using namespace smfr;

namespace {

std::vector<int> fold_sizes(const std::vector<int>& assignment, int k) {
    std::vector<int> sizes(k, 0);
    for (int f : assignment) ++sizes[f];
    return sizes;
}

}  // namespace

TEST_CASE("kfold_split: even split") {
    const auto sizes = fold_sizes(kfold_split(10, 5, 1), 5);
    for (int s : sizes) CHECK(s == 2);
}

TEST_CASE("kfold_split: remainder spread one per fold") {
    auto sizes = fold_sizes(kfold_split(11, 5, 2), 5);
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<int>{2, 2, 2, 2, 3});
}

TEST_CASE("kfold_split: deterministic and a partition") {
    const auto a1 = kfold_split(23, 4, 9);
    const auto a2 = kfold_split(23, 4, 9);
    CHECK(a1 == a2);
    for (int f : a1) {
        CHECK(f >= 0);
        CHECK(f < 4);
    }
    const auto a3 = kfold_split(23, 4, 10);
    CHECK(a1 != a3);
}

TEST_CASE("kfold_split rejects bad k") {
    CHECK_THROWS_AS(kfold_split(5, 6, 0), InvalidFolds);
    CHECK_THROWS_AS(kfold_split(5, 1, 0), InvalidFolds);
}

TEST_CASE("cv_select returns the singleton grid candidate") {
    const Matrix x = oracles::rand_matrix(24, 6, 301);
    const Matrix y = oracles::rand_matrix(24, 4, 302);
    SolverConfig cfg;
    cfg.seed = 13;
    const std::vector<Penalties> grid{{0.1, 0.1, 0.2}};
    const CvResult res = cv_select(x, y, 2, grid, 3, cfg);
    CHECK(res.table.size() == 1);
    CHECK(res.best.lambda1 == 0.1);
    CHECK(res.table[0].feasible);
    CHECK(res.table[0].fold_mse.size() == 3);
}

TEST_CASE("infeasible candidates are excluded, feasible one wins") {
    const Matrix x = oracles::rand_matrix(24, 6, 303);
    const Matrix y = oracles::rand_matrix(24, 4, 304);
    SolverConfig cfg;
    cfg.seed = 14;
    const std::vector<Penalties> grid{{1e7, 1e7, 1.0}, {0.05, 0.05, 0.2}};
    const CvResult res = cv_select(x, y, 2, grid, 3, cfg);
    CHECK_FALSE(res.table[0].feasible);
    CHECK(res.table[1].feasible);
    CHECK(res.best.lambda1 == 0.05);
}

TEST_CASE("all-infeasible grid raises NoValidFactorCount") {
    const Matrix x = oracles::rand_matrix(20, 5, 305);
    const Matrix y = oracles::rand_matrix(20, 4, 306);
    SolverConfig cfg;
    CHECK_THROWS_AS(cv_select(x, y, 2, {{1e7, 1e7, 1.0}}, 4, cfg), NoValidFactorCount);
}

TEST_CASE("cv_select is deterministic and reports honest means") {
    const Matrix x = oracles::rand_matrix(30, 8, 307);
    const Matrix y = oracles::rand_matrix(30, 5, 308);
    SolverConfig cfg;
    cfg.seed = 15;
    const std::vector<Penalties> grid{{0.05, 0.05, 0.1}, {0.2, 0.2, 0.1}};
    const CvResult r1 = cv_select(x, y, 3, grid, 3, cfg);
    const CvResult r2 = cv_select(x, y, 3, grid, 3, cfg);
    CHECK(r1.best.lambda1 == r2.best.lambda1);
    for (std::size_t c = 0; c < grid.size(); ++c) {
        CHECK(r1.table[c].mean_mse == r2.table[c].mean_mse);
        const double mean = std::accumulate(r1.table[c].fold_mse.begin(),
                                            r1.table[c].fold_mse.end(), 0.0) /
                            static_cast<double>(r1.table[c].fold_mse.size());
        CHECK(r1.table[c].mean_mse == doctest::Approx(mean).epsilon(1e-15));
    }
}

TEST_CASE("validation folds are disjoint from training folds") {
    const Index n = 17;
    const int k = 4;
    const auto assignment = kfold_split(n, k, 77);
    for (int f = 0; f < k; ++f) {
        std::set<Index> train, val;
        for (Index i = 0; i < n; ++i)
            (assignment[i] == f ? val : train).insert(i);
        CHECK(train.size() + val.size() == static_cast<std::size_t>(n));
        for (Index i : val) CHECK(train.count(i) == 0);
        CHECK_FALSE(val.empty());
    }
}

TEST_CASE("moderate penalties beat near-zero ones on structured data") {
    // scaled-down version of the high-dimensional regime: p > n, sparse truth
    SimSpec spec;
    spec.n = 30;
    spec.p = 50;
    spec.q = 12;
    spec.m = 4;
    spec.m0 = 1;
    spec.sigma_n = 2.0;
    spec.s = 0.3;
    spec.seed = 99;
    const SimData data = generate(spec);
    const auto pre = center_and_normalize(data.x, data.y);

    SolverConfig cfg;
    cfg.seed = 16;
    cfg.epsilon = 1e-4;
    const double scale =
        (pre.x.transpose() * pre.y).cwiseAbs().maxCoeff() / static_cast<double>(spec.n);
    const std::vector<Penalties> grid{{1e-8, 1e-8, 1e-6},
                                      {0.3 * scale, 0.3 * scale, 0.1}};
    const CvResult res = cv_select(pre.x, pre.y, 6, grid, 3, cfg);
    REQUIRE(res.table[0].feasible);
    REQUIRE(res.table[1].feasible);
    CHECK(res.table[1].mean_mse < res.table[0].mean_mse);
    CHECK(res.best.lambda3 == 0.1);
}

TEST_CASE("holdout mode trains on the leading rows only") {
    const Matrix x = oracles::rand_matrix(30, 6, 309);
    const Matrix y = oracles::rand_matrix(30, 4, 310);
    SolverConfig cfg;
    cfg.seed = 17;
    const std::vector<Penalties> grid{{0.05, 0.05, 0.1}};
    const CvResult res = holdout_select(x, y, 2, grid, 20, cfg);
    CHECK(res.table.size() == 1);
    CHECK(res.table[0].fold_mse.size() == 1);
    CHECK_THROWS_AS(holdout_select(x, y, 2, grid, 30, cfg), InvalidConfig);
}

TEST_CASE("default grid covers the documented lattice") {
    const Matrix x = oracles::rand_matrix(20, 5, 311);
    const Matrix y = oracles::rand_matrix(20, 4, 312);
    const auto grid = default_grid(x, y);
    CHECK(grid.size() == 6 * 6 * 3);
    const double scale =
        (x.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
    CHECK(grid.front().lambda1 == doctest::Approx(0.01 * scale));
    CHECK(grid.back().lambda3 == 1.0);
}

TEST_CASE("scalar CV picks the error-minimizing candidate deterministically") {
    const Matrix x = oracles::rand_matrix(24, 8, 313);
    const Matrix d = oracles::rand_matrix(8, 3, 314);
    const Matrix y = x * d + 0.05 * oracles::rand_matrix(24, 3, 315);
    const std::vector<double> lambdas{1e-4, 1.0, 100.0};
    const auto res = cv_select_scalar(x, y, lambdas, 3, 55,
                                      [](const Matrix& xt, const Matrix& yt, double l) {
                                          return ridge_baseline(xt, yt, l);
                                      });
    CHECK(res.mean_mse.size() == 3);
    // heavy shrinkage must hurt on strongly structured data
    CHECK(res.best != 100.0);
    const auto res2 = cv_select_scalar(x, y, lambdas, 3, 55,
                                       [](const Matrix& xt, const Matrix& yt, double l) {
                                           return ridge_baseline(xt, yt, l);
                                       });
    CHECK(res.best == res2.best);
}
