#include "smfr/csv.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

namespace smfr {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Matrix load_csv(const std::string& path, bool header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    bool skipped_header = !header;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        std::vector<double> row;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t end = line.find(',', start);
            if (end == std::string::npos) end = line.size();
            const char* first = line.data() + start;
            const char* last = line.data() + end;
            while (first < last && (*first == ' ' || *first == '\t')) ++first;
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(first, last, value);
            while (ptr < last && (*ptr == ' ' || *ptr == '\t')) ++ptr;
            if (ec != std::errc() || ptr != last)
                throw IoError(path + ": cannot parse '" +
                              std::string(line.data() + start, end - start) +
                              "' as a number");
            row.push_back(value);
            if (end == line.size()) break;
            start = end + 1;
        }
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw IoError(path + ": ragged row with " + std::to_string(row.size()) +
                          " fields, expected " + std::to_string(width));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError(path + ": no numeric rows");

    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j)
            m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    ensure_finite(m, path.c_str());
    return m;
}

namespace {

void write_csv_impl(const std::string& path, const Matrix& m,
                    const std::vector<std::string>* col_names) {
    if (col_names && static_cast<Index>(col_names->size()) != m.cols())
        throw ValidationError("save_csv: header width does not match the matrix");
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        if (col_names) {
            for (Index j = 0; j < m.cols(); ++j) {
                if (j) out << ',';
                out << (*col_names)[static_cast<std::size_t>(j)];
            }
            out << '\n';
        }
        for (Index i = 0; i < m.rows(); ++i) {
            for (Index j = 0; j < m.cols(); ++j) {
                if (j) out << ',';
                out << format_double(m(i, j));
            }
            out << '\n';
        }
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

}  // namespace

void save_csv(const std::string& path, const Matrix& m) { write_csv_impl(path, m, nullptr); }

void save_csv(const std::string& path, const Matrix& m,
              const std::vector<std::string>& col_names) {
    write_csv_impl(path, m, &col_names);
}

std::string column_checksum(const Matrix& m, Index col) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (Index i = 0; i < m.rows(); ++i) {
        const double v = m(i, col);
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        for (unsigned char b : bytes) {
            hash ^= b;
            hash *= 0x100000001b3ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace smfr
