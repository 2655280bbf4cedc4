#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpkit/vec.hpp"

namespace fpkit {

/// 17 significant digits round-trips 64-bit doubles losslessly.
inline std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<Vec> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }

    const Vec& column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return columns[i];
        throw std::invalid_argument("CsvTable: no column named " + name);
    }
    bool has_column(const std::string& name) const {
        for (const auto& h : header)
            if (h == name) return true;
        return false;
    }
};

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path, const std::vector<std::string>& header)
        : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ',';
            out_ << header[i];
        }
        out_ << '\n';
        width_ = header.size();
    }

    void row(const std::vector<double>& values) {
        if (values.size() != width_) throw std::invalid_argument("CsvWriter: row width mismatch");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            out_ << fmt_g17(values[i]);
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
    std::size_t width_ = 0;
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) t.header.push_back(cell);
    if (t.header.empty()) throw std::runtime_error("read_csv: malformed header in " + path);
    t.columns.assign(t.header.size(), {});
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::size_t i = 0;
        while (std::getline(ls, cell, ',')) {
            if (i >= t.header.size())
                throw std::runtime_error("read_csv: too many cells at line " + std::to_string(lineno));
            try {
                t.columns[i].push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::runtime_error("read_csv: bad number at line " + std::to_string(lineno));
            }
            ++i;
        }
        if (i != t.header.size())
            throw std::runtime_error("read_csv: short row at line " + std::to_string(lineno));
    }
    return t;
}

}  // namespace fpkit
