#pragma once

#include <string>
#include <vector>

#include "smfr/types.hpp"

namespace smfr {

/// Reads a comma-separated numeric matrix. Rows must all have the same width;
/// entries must be finite. When header is true the first line is skipped.
Matrix load_csv(const std::string& path, bool header = false);

/// Writes comma-separated values with 17 significant digits (lossless for
/// doubles), via a temporary file renamed into place so readers never see a
/// truncated file.
void save_csv(const std::string& path, const Matrix& m);

/// Same, with a single header row.
void save_csv(const std::string& path, const Matrix& m,
              const std::vector<std::string>& col_names);

/// 17-significant-digit rendering used for all numeric file output.
std::string format_double(double v);

/// FNV-1a over a column's raw double bytes, as a 16-hex-digit string. Used
/// for data fingerprints in persisted models.
std::string column_checksum(const Matrix& m, Index col);

}  // namespace smfr
