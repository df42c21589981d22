#pragma once

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdlab::io {

/// Shortest text that round-trips: 17 significant digits.
[[nodiscard]] inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Table with a fixed column order, written as CSV with one header line.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
        if (columns_.empty()) throw std::invalid_argument("csv: no columns");
    }

    void row(const std::vector<double>& values) {
        if (values.size() != columns_.size()) throw std::invalid_argument("csv: row width mismatch");
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(format_double(v));
        rows_.push_back(std::move(cells));
    }

    /// Row of preformatted cells (e.g. empty cells for missing values).
    void row_text(std::vector<std::string> cells) {
        if (cells.size() != columns_.size()) throw std::invalid_argument("csv: row width mismatch");
        rows_.push_back(std::move(cells));
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_.size(); }
    [[nodiscard]] const std::vector<std::string>& columns() const noexcept { return columns_; }

    [[nodiscard]] std::string str() const {
        std::ostringstream out;
        write_line(out, columns_);
        for (const auto& r : rows_) write_line(out, r);
        return out.str();
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + path);
        f << str();
        if (!f) throw std::runtime_error("write failed: " + path);
    }

private:
    static void write_line(std::ostream& out, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    }

    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

/// Parsed CSV with a header line; all cells numeric or empty (NaN).
struct CsvData {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] std::size_t index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw std::invalid_argument("csv: no column '" + name + "'");
    }

    [[nodiscard]] std::vector<double> column(const std::string& name) const {
        const std::size_t c = index(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[c]);
        return out;
    }
};

[[nodiscard]] inline CsvData read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    CsvData d;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        if (!s.empty() && s.back() == ',') out.emplace_back();
        return out;
    };
    if (!std::getline(f, line)) throw std::runtime_error("empty csv: " + path);
    d.columns = split(line);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != d.columns.size()) throw std::runtime_error("ragged csv row in " + path);
        std::vector<double> r;
        for (const auto& c : cells) r.push_back(c.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(c));
        d.rows.push_back(std::move(r));
    }
    return d;
}

}  // namespace pdlab::io
