#pragma once

#include <string>
#include <vector>

#include "smfr/altmin.hpp"
#include "smfr/types.hpp"

namespace smfr {

inline constexpr const char* kToolkitVersion = "0.1.0";
inline constexpr int kModelSchemaVersion = 1;

struct TraceSummary {
    int iterations{0};
    double f_initial{0.0};
    double f_final{0.0};
    Termination termination{Termination::Converged};
};
TraceSummary summarize(const FitTrace& trace);

struct DataFingerprint {
    Index n{0}, p{0}, q{0};
    std::vector<std::string> x_checksums;
    std::vector<std::string> y_checksums;
};
DataFingerprint fingerprint(const Matrix& x, const Matrix& y);

struct ModelMeta {
    std::string config_echo_json;  // pre-serialized configuration blob
    TraceSummary trace;
    DataFingerprint data;
};

struct LoadedModel {
    FactorModel model;
    ModelMeta meta;
    std::string toolkit_version;
    int schema_version{kModelSchemaVersion};
};

/// Single JSON document with dense arrays and sorted keys; written through a
/// temporary file. Round-trips losslessly: load(save(m)) predicts
/// bit-identically.
void save_model(const std::string& path, const FactorModel& model, const ModelMeta& meta);
LoadedModel load_model(const std::string& path);

/// Raw-scale predictions: maps x_new by the stored preprocessing stats,
/// applies A*B, and un-centers the responses.
Matrix predict(const FactorModel& model, const Matrix& x_new);

}  // namespace smfr
