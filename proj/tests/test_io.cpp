#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "smfr/csv.hpp"
#include "smfr/model_io.hpp"
#include "smfr/preprocess.hpp"

using namespace smfr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("smfr_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("csv round trip is lossless for doubles") {
    TempDir dir;
    Matrix m(3, 4);
    m << 1.0 / 3.0, -2.5e-300, 1.7976931348623157e308, 0.0,
        -1.0, 3.141592653589793, 2.2250738585072014e-308, 42.0,
        1e17 + 1, -0.1, 5e-324, -7.25;
    save_csv(dir.file("m.csv"), m);
    const Matrix back = load_csv(dir.file("m.csv"));
    REQUIRE(back.rows() == 3);
    REQUIRE(back.cols() == 4);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 4; ++j) CHECK(back(i, j) == m(i, j));
}

TEST_CASE("csv header row is written and skipped on request") {
    TempDir dir;
    const Matrix m = oracles::rand_matrix(2, 3, 501);
    save_csv(dir.file("h.csv"), m, {"a", "b", "c"});
    const Matrix back = load_csv(dir.file("h.csv"), /*header=*/true);
    CHECK((back - m).norm() == 0.0);
    CHECK_THROWS_AS(load_csv(dir.file("h.csv"), false), IoError);
}

TEST_CASE("csv loader rejects malformed input") {
    TempDir dir;
    {
        std::ofstream out(dir.file("ragged.csv"));
        out << "1,2,3\n4,5\n";
    }
    CHECK_THROWS_AS(load_csv(dir.file("ragged.csv")), IoError);
    {
        std::ofstream out(dir.file("text.csv"));
        out << "1,hello\n";
    }
    CHECK_THROWS_AS(load_csv(dir.file("text.csv")), IoError);
    {
        std::ofstream out(dir.file("nan.csv"));
        out << "1,nan\n";
    }
    CHECK_THROWS_AS(load_csv(dir.file("nan.csv")), ValidationError);
    CHECK_THROWS_AS(load_csv(dir.file("missing.csv")), IoError);
}

TEST_CASE("format_double renders 17 significant digits that round-trip") {
    for (double v : {1.0 / 3.0, 1e-17, 123456.789012345678, -2.2250738585072014e-308}) {
        const std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("column checksums distinguish perturbed data") {
    const Matrix m = oracles::rand_matrix(10, 2, 502);
    Matrix m2 = m;
    m2(3, 1) += 1e-12;
    CHECK(column_checksum(m, 0) == column_checksum(m2, 0));
    CHECK(column_checksum(m, 1) != column_checksum(m2, 1));
}

TEST_CASE("model save/load round trip preserves predictions bit-exactly") {
    TempDir dir;
    const Matrix x = oracles::rand_matrix(15, 6, 503);
    const Matrix y = oracles::rand_matrix(15, 4, 504);
    const auto pre = center_and_normalize(x, y);

    FactorModel model;
    model.m_hat = 2;
    model.a_hat = oracles::rand_matrix(6, 2, 505);
    model.b_hat = oracles::rand_matrix(2, 4, 506);
    model.penalties = {0.1, 0.2, 0.3};
    model.stats = pre.stats;

    ModelMeta meta;
    meta.config_echo_json = R"({"command":"fit","seed":7})";
    meta.trace.iterations = 12;
    meta.trace.f_initial = 100.0;
    meta.trace.f_final = 3.5;
    meta.trace.termination = Termination::Converged;
    meta.data = fingerprint(x, y);

    const std::string path = dir.file("model.json");
    save_model(path, model, meta);
    const LoadedModel loaded = load_model(path);

    CHECK(loaded.schema_version == kModelSchemaVersion);
    CHECK(loaded.toolkit_version == kToolkitVersion);
    CHECK(loaded.model.m_hat == 2);
    CHECK(loaded.model.penalties.lambda2 == 0.2);
    CHECK(loaded.meta.trace.iterations == 12);
    CHECK(loaded.meta.data.x_checksums == meta.data.x_checksums);

    const Matrix probe = oracles::rand_matrix(7, 6, 507);
    const Matrix p1 = predict(model, probe);
    const Matrix p2 = predict(loaded.model, probe);
    REQUIRE(p1.rows() == p2.rows());
    for (Index i = 0; i < p1.rows(); ++i)
        for (Index j = 0; j < p1.cols(); ++j) CHECK(p1(i, j) == p2(i, j));
}

TEST_CASE("predict applies preprocessing and un-centers") {
    const Matrix x = oracles::rand_matrix(12, 5, 508);
    const Matrix y = oracles::rand_matrix(12, 3, 509);
    const auto pre = center_and_normalize(x, y);
    FactorModel model;
    model.m_hat = 2;
    model.a_hat = oracles::rand_matrix(5, 2, 510);
    model.b_hat = oracles::rand_matrix(2, 3, 511);
    model.stats = pre.stats;

    const Matrix expected =
        (apply_x_transform(pre.stats, x) * model.a_hat * model.b_hat).rowwise() +
        pre.stats.y_means.transpose();
    CHECK((predict(model, x) - expected).norm() < 1e-14);
    CHECK_THROWS_AS(predict(model, Matrix::Zero(3, 4)), ShapeMismatch);
}

TEST_CASE("loading a corrupt model file reports IoError") {
    TempDir dir;
    {
        std::ofstream out(dir.file("bad.json"));
        out << "{\"schema_version\": 1";
    }
    CHECK_THROWS_AS(load_model(dir.file("bad.json")), IoError);
    {
        std::ofstream out(dir.file("wrong.json"));
        out << R"({"schema_version": 99})";
    }
    CHECK_THROWS_AS(load_model(dir.file("wrong.json")), IoError);
}
