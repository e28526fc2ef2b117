#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace cohscat::cli {

/// Decimal with 12 significant digits; negative zero prints as 0.
inline std::string format_number(double x) {
    if (x == 0.0) x = 0.0;
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

using Cell = std::variant<double, std::string>;

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row) {
        if (row.size() != header.size()) throw std::logic_error("CsvTable: row width does not match header");
        rows.push_back(std::move(row));
    }

    /// Numeric column by name.
    std::vector<double> column(const std::string& name) const {
        std::size_t idx = header.size();
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) idx = i;
        if (idx == header.size()) throw std::out_of_range("CsvTable: no column " + name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(std::get<double>(r[idx]));
        return out;
    }

    std::string str() const {
        std::string s;
        auto join = [&s](const auto& items, auto&& fmt) {
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (i) s += ',';
                s += fmt(items[i]);
            }
            s += '\n';
        };
        join(header, [](const std::string& h) { return h; });
        for (const auto& r : rows)
            join(r, [](const Cell& c) {
                return std::holds_alternative<double>(c) ? format_number(std::get<double>(c)) : std::get<std::string>(c);
            });
        return s;
    }
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace cohscat::cli
