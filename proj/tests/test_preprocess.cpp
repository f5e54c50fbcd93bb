#include <doctest.h>

#include "oracles.hpp"
#include "smfr/preprocess.hpp"

using namespace smfr;

TEST_CASE("center_and_normalize maps (1,2,3) to the hand-computed column") {
    Matrix x(3, 1), y(3, 1);
    x << 1, 2, 3;
    y << 0, 0, 0;
    const auto pre = center_and_normalize(x, y);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(pre.x(0, 0) == doctest::Approx(-inv_sqrt2).epsilon(1e-15));
    CHECK(pre.x(1, 0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(pre.x(2, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-15));
    CHECK(pre.stats.x_means(0) == doctest::Approx(2.0));
    CHECK(pre.stats.x_norms(0) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("already normalized input is returned unchanged") {
    Matrix x(4, 2);
    x << 1, 0, -1, 0, 0, 1, 0, -1;
    x /= std::sqrt(2.0);
    Matrix y = oracles::rand_matrix(4, 3, 7);
    y.rowwise() -= y.colwise().mean();
    const auto pre = center_and_normalize(x, y);
    CHECK((pre.x - x).norm() < 1e-14);
    CHECK(pre.stats.x_means.norm() < 1e-15);
    CHECK((pre.stats.x_norms.array() - 1.0).abs().maxCoeff() < 1e-14);
    CHECK((pre.y - y).norm() < 1e-14);
}

TEST_CASE("constant predictor column is rejected") {
    Matrix x(3, 2), y(3, 1);
    x << 1, 5, 2, 5, 3, 5;
    y << 1, 2, 3;
    CHECK_THROWS_AS(center_and_normalize(x, y), ConstantColumn);
    try {
        center_and_normalize(x, y);
    } catch (const ConstantColumn& e) {
        CHECK(e.column() == 1);
    }
}

TEST_CASE("row count mismatch is rejected") {
    CHECK_THROWS_AS(center_and_normalize(Matrix::Random(3, 2), Matrix::Random(4, 1)),
                    ShapeMismatch);
}

TEST_CASE("stats map new data and un-map predictions") {
    const Matrix x = oracles::rand_matrix(10, 4, 3);
    const Matrix y = oracles::rand_matrix(10, 2, 4);
    const auto pre = center_and_normalize(x, y);
    CHECK((apply_x_transform(pre.stats, x) - pre.x).norm() < 1e-12);
    CHECK((uncenter_y(pre.stats, pre.y) - y).norm() < 1e-12);
}

TEST_CASE("non-finite input is rejected at the boundary") {
    Matrix x = Matrix::Random(3, 2);
    Matrix y = Matrix::Random(3, 1);
    x(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(center_and_normalize(x, y), ValidationError);
}
