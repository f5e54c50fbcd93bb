#include "smfr/model_io.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "smfr/csv.hpp"
#include "smfr/preprocess.hpp"

namespace smfr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows, const char* what) {
    if (!rows.is_array() || rows.empty())
        throw IoError(std::string("model file: ") + what + " is not a non-empty array");
    const Index r = static_cast<Index>(rows.size());
    const Index c = static_cast<Index>(rows[0].size());
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i) {
        const json& row = rows[static_cast<std::size_t>(i)];
        if (static_cast<Index>(row.size()) != c)
            throw IoError(std::string("model file: ragged ") + what);
        for (Index j = 0; j < c; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
    return m;
}

json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Vector vector_from_json(const json& arr, const char* what) {
    if (!arr.is_array())
        throw IoError(std::string("model file: ") + what + " is not an array");
    Vector v(static_cast<Index>(arr.size()));
    for (Index i = 0; i < v.size(); ++i) v(i) = arr[static_cast<std::size_t>(i)].get<double>();
    return v;
}

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::Converged: return "converged";
        case Termination::IterationCap: return "iteration_cap";
        case Termination::PerfectFit: return "perfect_fit";
    }
    return "unknown";
}

Termination termination_from(const std::string& s) {
    if (s == "converged") return Termination::Converged;
    if (s == "iteration_cap") return Termination::IterationCap;
    if (s == "perfect_fit") return Termination::PerfectFit;
    throw IoError("model file: unknown termination '" + s + "'");
}

}  // namespace

TraceSummary summarize(const FitTrace& trace) {
    TraceSummary s;
    s.iterations = static_cast<int>(trace.iterations.size());
    s.f_initial = trace.f_initial;
    s.f_final = trace.iterations.empty() ? trace.f_initial : trace.iterations.back().f;
    s.termination = trace.termination;
    return s;
}

DataFingerprint fingerprint(const Matrix& x, const Matrix& y) {
    DataFingerprint fp;
    fp.n = x.rows();
    fp.p = x.cols();
    fp.q = y.cols();
    for (Index j = 0; j < x.cols(); ++j) fp.x_checksums.push_back(column_checksum(x, j));
    for (Index j = 0; j < y.cols(); ++j) fp.y_checksums.push_back(column_checksum(y, j));
    return fp;
}

void save_model(const std::string& path, const FactorModel& model, const ModelMeta& meta) {
    json doc;
    doc["schema_version"] = kModelSchemaVersion;
    doc["toolkit_version"] = kToolkitVersion;
    doc["m_hat"] = model.m_hat;
    doc["penalties"] = {{"lambda1", model.penalties.lambda1},
                        {"lambda2", model.penalties.lambda2},
                        {"lambda3", model.penalties.lambda3}};
    doc["a_hat"] = matrix_to_json(model.a_hat);
    doc["b_hat"] = matrix_to_json(model.b_hat);
    doc["stats"] = {{"x_means", vector_to_json(model.stats.x_means)},
                    {"x_norms", vector_to_json(model.stats.x_norms)},
                    {"y_means", vector_to_json(model.stats.y_means)}};
    doc["trace_summary"] = {{"iterations", meta.trace.iterations},
                            {"f_initial", meta.trace.f_initial},
                            {"f_final", meta.trace.f_final},
                            {"termination", termination_name(meta.trace.termination)}};
    doc["data_fingerprint"] = {{"n", meta.data.n},
                               {"p", meta.data.p},
                               {"q", meta.data.q},
                               {"x_checksums", meta.data.x_checksums},
                               {"y_checksums", meta.data.y_checksums}};
    doc["config_echo"] =
        meta.config_echo_json.empty() ? json() : json::parse(meta.config_echo_json);

    const fs::path tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << doc.dump(2) << '\n';
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    try {
        LoadedModel out;
        out.schema_version = doc.at("schema_version").get<int>();
        if (out.schema_version != kModelSchemaVersion)
            throw IoError(path + ": unsupported schema version " +
                          std::to_string(out.schema_version));
        out.toolkit_version = doc.at("toolkit_version").get<std::string>();
        out.model.m_hat = doc.at("m_hat").get<Index>();
        const json& pen = doc.at("penalties");
        out.model.penalties = {pen.at("lambda1").get<double>(),
                               pen.at("lambda2").get<double>(),
                               pen.at("lambda3").get<double>()};
        out.model.a_hat = matrix_from_json(doc.at("a_hat"), "a_hat");
        out.model.b_hat = matrix_from_json(doc.at("b_hat"), "b_hat");
        const json& stats = doc.at("stats");
        out.model.stats.x_means = vector_from_json(stats.at("x_means"), "x_means");
        out.model.stats.x_norms = vector_from_json(stats.at("x_norms"), "x_norms");
        out.model.stats.y_means = vector_from_json(stats.at("y_means"), "y_means");
        const json& trace = doc.at("trace_summary");
        out.meta.trace.iterations = trace.at("iterations").get<int>();
        out.meta.trace.f_initial = trace.at("f_initial").get<double>();
        out.meta.trace.f_final = trace.at("f_final").get<double>();
        out.meta.trace.termination =
            termination_from(trace.at("termination").get<std::string>());
        const json& fp = doc.at("data_fingerprint");
        out.meta.data.n = fp.at("n").get<Index>();
        out.meta.data.p = fp.at("p").get<Index>();
        out.meta.data.q = fp.at("q").get<Index>();
        out.meta.data.x_checksums = fp.at("x_checksums").get<std::vector<std::string>>();
        out.meta.data.y_checksums = fp.at("y_checksums").get<std::vector<std::string>>();
        const json& echo = doc.at("config_echo");
        out.meta.config_echo_json = echo.is_null() ? "" : echo.dump();

        if (out.model.a_hat.cols() != out.model.m_hat ||
            out.model.b_hat.rows() != out.model.m_hat)
            throw IoError(path + ": factor shapes disagree with m_hat");
        return out;
    } catch (const json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
}

Matrix predict(const FactorModel& model, const Matrix& x_new) {
    const Matrix xn = apply_x_transform(model.stats, x_new);
    return uncenter_y(model.stats, (xn * model.a_hat) * model.b_hat);
}

}  // namespace smfr
