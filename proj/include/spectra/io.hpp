#pragma once

// File output helpers: locale-independent 17-significant-digit numbers
// (round-trippable doubles, so golden-file comparisons are exact) and
// atomic write-temp-then-rename file creation.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spectra/errors.hpp"

namespace spectra {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    fs::create_directories(dir);
    const fs::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw StatsError("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw StatsError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

// Minimal CSV reader for the fixed-schema files this tool writes.
inline std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path,
                                                      std::size_t expected_columns) {
    std::ifstream in(path);
    if (!in) throw StatsError("cannot open spectrum file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw StatsError("empty spectrum file: " + path.string());
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        const char* p = line.c_str();
        while (true) {
            char* end = nullptr;
            const double v = std::strtod(p, &end);
            if (end == p)
                throw StatsError("malformed number in " + path.string() + " line " +
                                 std::to_string(lineno));
            row.push_back(v);
            p = end;
            if (*p == ',') {
                ++p;
            } else if (*p == '\0' || *p == '\r') {
                break;
            } else {
                throw StatsError("malformed row in " + path.string() + " line " +
                                 std::to_string(lineno));
            }
        }
        if (row.size() != expected_columns)
            throw StatsError("expected " + std::to_string(expected_columns) + " columns in " +
                             path.string() + " line " + std::to_string(lineno) + ", got " +
                             std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace spectra
