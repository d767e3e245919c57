#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bcmpc/common.hpp"

namespace bcmpc {

struct CsvTable {
    std::vector<std::string> header;       ///< empty when the file has none
    std::vector<std::vector<std::string>> rows;
    std::vector<long> line_numbers;        ///< 1-based source line per row
    std::string path;
};

namespace csv_detail {

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    for (auto& f : out) {
        while (!f.empty() && f.front() == ' ') f.erase(f.begin());
        while (!f.empty() && f.back() == ' ') f.pop_back();
    }
    return out;
}

inline bool parses_as_number(const std::string& s) {
    if (s.empty()) return false;
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    return end && *end == '\0';
}

}  // namespace csv_detail

/// Reads a CSV file, skipping blank lines and '#' comments. The first
/// non-comment row is treated as a header when its first field is not a
/// number or a timestamp.
inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    CsvTable table;
    table.path = path;
    std::string line;
    long lineno = 0;
    bool saw_first = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string trimmed = line;
        while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == ' '))
            trimmed.pop_back();
        if (trimmed.empty() || trimmed[0] == '#') continue;
        auto fields = csv_detail::split_fields(trimmed);
        if (!saw_first) {
            saw_first = true;
            const std::string& f0 = fields.front();
            const bool timestampish =
                f0.find(':') != std::string::npos || f0.find('-') != std::string::npos;
            if (!csv_detail::parses_as_number(f0) && !timestampish) {
                table.header = fields;
                continue;
            }
        }
        table.rows.push_back(fields);
        table.line_numbers.push_back(lineno);
    }
    return table;
}

/// Timestamp field: either decimal hours or an ISO-like stamp
/// (YYYY-MM-DD[T ]HH:MM[:SS]). ISO stamps become hours since `epoch_day0`
/// (days since civil epoch of the first stamp seen, passed by reference and
/// captured on first use).
inline double parse_time_hours(const std::string& field, long& epoch_day0,
                               const std::string& context) {
    if (field.find('-') == std::string::npos || field.find(':') == std::string::npos)
        return parse_double(field, context);
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    const int got = std::sscanf(field.c_str(), "%d-%d-%d%*[T ]%d:%d:%d", &y, &mo, &d, &h, &mi, &s);
    if (got < 5) throw DataError("cannot parse timestamp '" + field + "' (" + context + ")");
    // days since civil 1970-01-01 (Howard Hinnant's algorithm)
    const int yy = y - (mo <= 2);
    const long era = (yy >= 0 ? yy : yy - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(yy - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(mo + (mo > 2 ? -3 : 9)) + 2) / 5 +
                         static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    const long days = era * 146097 + static_cast<long>(doe) - 719468;
    if (epoch_day0 == -1) epoch_day0 = days;
    return static_cast<double>(days - epoch_day0) * 24.0 + h + mi / 60.0 + s / 3600.0;
}

}  // namespace bcmpc
