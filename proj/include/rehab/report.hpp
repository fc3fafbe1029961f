#pragma once

// Row/column reports rendered either as aligned text for people or as
// tab-separated values (header line first) for other programs.

#include <algorithm>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "rehab/error.hpp"

namespace rehab {

enum class OutputFormat { text, tabular };

inline OutputFormat parse_format(std::string_view s) {
    if (s == "text") return OutputFormat::text;
    if (s == "tabular") return OutputFormat::tabular;
    throw Error(ErrorKind::validation, "format must be text or tabular");
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) {
        if (row.size() != header.size()) throw Error(ErrorKind::validation, "row width differs from header");
        rows.push_back(std::move(row));
    }
};

inline std::string fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string render(const Table& t, OutputFormat format) {
    std::string out;
    if (format == OutputFormat::tabular) {
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out += '\t';
                out += cells[i];
            }
            out += '\n';
        };
        line(t.header);
        for (const auto& r : t.rows) line(r);
        return out;
    }
    std::vector<std::size_t> width(t.header.size());
    for (std::size_t i = 0; i < width.size(); ++i) {
        width[i] = t.header[i].size();
        for (const auto& r : t.rows) width[i] = std::max(width[i], r[i].size());
    }
    auto line = [&](const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s += "  ";
            s += cells[i];
            s.append(width[i] - cells[i].size(), ' ');
        }
        s.erase(s.find_last_not_of(' ') + 1);
        out += s + '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return out;
}

}  // namespace rehab
