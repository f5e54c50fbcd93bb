#include <doctest.h>

#include "oracles.hpp"
#include "smfr/factor_select.hpp"

using namespace smfr;

TEST_CASE("numerical rank on canonical matrices") {
    CHECK(numerical_rank(Matrix::Identity(3, 3)) == 3);
    CHECK(numerical_rank(Matrix::Zero(4, 2)) == 0);

    Matrix d = Matrix::Zero(3, 3);
    d.diagonal() << 1.0, 1e-3, 1e-12;
    CHECK(numerical_rank(d, {1e-8}) == 2);
}

TEST_CASE("numerical rank validates its inputs") {
    CHECK_THROWS_AS(numerical_rank(Matrix(0, 0)), ValidationError);
    CHECK_THROWS_AS(numerical_rank(Matrix::Identity(2, 2), {2.0}), InvalidConfig);
}

TEST_CASE("unregularized fits keep every factor: m_hat = r") {
    const Matrix x = oracles::rand_matrix(30, 8, 201);
    const Matrix y = oracles::rand_matrix(30, 6, 202);
    SolverConfig cfg;
    cfg.seed = 5;
    const SelectResult res = select_factors(x, y, 3, {0.0, 0.0, 0.01}, cfg);
    CHECK(res.model.m_hat == 3);
    CHECK(res.attempts.size() == 1);
    CHECK(numerical_rank(res.model.a_hat) == 3);
    CHECK(numerical_rank(res.model.b_hat) == 3);
}

TEST_CASE("an enormous loading penalty zeroes B at every m") {
    const Matrix x = oracles::rand_matrix(20, 6, 203);
    const Matrix y = oracles::rand_matrix(20, 5, 204);
    SolverConfig cfg;
    cfg.seed = 6;
    CHECK_THROWS_AS(select_factors(x, y, 3, {0.1, 1e6, 0.5}, cfg), NoValidFactorCount);
}

TEST_CASE("every m above the returned one failed a rank check") {
    const Matrix x = oracles::rand_matrix(25, 10, 205);
    // responses driven by a genuine rank-2 signal
    const Matrix a_true = oracles::rand_matrix(10, 2, 206);
    const Matrix b_true = oracles::rand_matrix(2, 6, 207);
    const Matrix y = x * a_true * b_true + 0.1 * oracles::rand_matrix(25, 6, 208);
    SolverConfig cfg;
    cfg.seed = 7;
    const SelectResult res = select_factors(x, y, 5, {0.3, 0.3, 0.1}, cfg);
    CHECK(res.model.m_hat >= 1);
    CHECK(res.attempts.back().m == res.model.m_hat);
    for (std::size_t i = 0; i + 1 < res.attempts.size(); ++i) {
        const auto& att = res.attempts[i];
        CHECK((att.rank_a < att.m || att.rank_b < att.m));
    }
    CHECK(res.attempts.back().rank_a == res.model.m_hat);
    CHECK(res.attempts.back().rank_b == res.model.m_hat);
}

TEST_CASE("selection is deterministic given inputs, seed, and policy") {
    const Matrix x = oracles::rand_matrix(20, 8, 209);
    const Matrix y = oracles::rand_matrix(20, 5, 210);
    SolverConfig cfg;
    cfg.seed = 11;
    const SelectResult r1 = select_factors(x, y, 4, {0.2, 0.2, 0.1}, cfg);
    const SelectResult r2 = select_factors(x, y, 4, {0.2, 0.2, 0.1}, cfg);
    CHECK(r1.model.m_hat == r2.model.m_hat);
    CHECK((r1.model.a_hat - r2.model.a_hat).norm() == 0.0);
    CHECK((r1.model.b_hat - r2.model.b_hat).norm() == 0.0);
}

TEST_CASE("select_factors validates r") {
    const Matrix x = oracles::rand_matrix(10, 4, 211);
    const Matrix y = oracles::rand_matrix(10, 3, 212);
    SolverConfig cfg;
    CHECK_THROWS_AS(select_factors(x, y, 0, {0.1, 0.1, 0.1}, cfg), InvalidConfig);
    CHECK_THROWS_AS(select_factors(x, y, 4, {0.1, 0.1, 0.1}, cfg), InvalidConfig);
}
