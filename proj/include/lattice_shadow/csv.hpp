#pragma once

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lattice_shadow/config.hpp"
#include "lattice_shadow/errors.hpp"

namespace lattice_shadow {

/// Named columns of equal length.
struct Table {
    std::vector<std::string> headers;
    std::vector<std::vector<double>> columns;

    Table() = default;
    explicit Table(std::vector<std::string> names)
        : headers(std::move(names)), columns(headers.size()) {}

    void add_row(const std::vector<double>& row) {
        if (row.size() != columns.size()) throw ValidationError("row width differs from table width");
        for (std::size_t c = 0; c < row.size(); ++c) columns[c].push_back(row[c]);
    }

    std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
};

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (const char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

}  // namespace detail

/// CSV text: optional '#' comment line, header row, then one row per entry.
inline std::string format_csv(const Table& table, const std::string& comment = {}) {
    if (table.headers.size() != table.columns.size()) throw ValidationError("table headers and columns differ");
    const std::size_t rows = table.rows();
    for (const auto& c : table.columns)
        if (c.size() != rows) throw ValidationError("table is not rectangular");

    std::string out;
    if (!comment.empty()) out += "# " + comment + "\n";
    for (std::size_t c = 0; c < table.headers.size(); ++c) {
        if (c) out += ',';
        out += detail::csv_field(table.headers[c]);
    }
    out += '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c) out += ',';
            out += format_double(table.columns[c][r]);
        }
        out += '\n';
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << text;
    f.close();
    if (!f) throw IoError("failed writing " + path);
}

inline void emit_csv(const Table& table, const std::string& path, const std::string& comment = {}) {
    write_text_file(path, format_csv(table, comment));
}

}  // namespace lattice_shadow
