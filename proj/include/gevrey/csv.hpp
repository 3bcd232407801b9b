#pragma once

// Minimal numeric CSV: comma separated, one header line, doubles written
// with %.17g so a file round-trips bit-exactly.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gevrey/error.hpp"

namespace gevrey {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        fail(ErrorCode::Parse, "no column named " + name);
    }
    std::vector<double> values(const std::string& name) const {
        const std::size_t c = column(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[c]);
        return out;
    }
};

inline void write_csv(std::ostream& os, const CsvTable& t) {
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
        os << '\n';
    }
}

inline void save_csv(const std::string& path, const CsvTable& t) {
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), ErrorCode::Io, "cannot open " + path);
    write_csv(os, t);
    require(static_cast<bool>(os), ErrorCode::Io, "failed writing " + path);
}

inline std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

inline CsvTable read_csv(std::istream& is) {
    CsvTable t;
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), ErrorCode::Parse, "CSV has no header");
    t.header = split_commas(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split_commas(line);
        require(cells.size() == t.header.size(), ErrorCode::Parse, "CSV row width differs from header");
        std::vector<double> row;
        for (const auto& c : cells) {
            char* end = nullptr;
            const double v = std::strtod(c.c_str(), &end);
            require(end != c.c_str() && *end == '\0', ErrorCode::Parse, "not a number: '" + c + "'");
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline CsvTable load_csv(const std::string& path) {
    std::ifstream is(path);
    require(static_cast<bool>(is), ErrorCode::Io, "cannot open " + path);
    return read_csv(is);
}

}  // namespace gevrey
