#pragma once

#include <cerrno>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <vector>

#include "nystrom/errors.hpp"

namespace nystrom::detail {

/** Split one CSV line on commas; fields are whitespace-trimmed. */
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string field = (comma == std::string::npos)
                                ? line.substr(start)
                                : line.substr(start, comma - start);
        const auto a = field.find_first_not_of(" \t\r");
        if (a == std::string::npos) {
            field.clear();
        } else {
            const auto b = field.find_last_not_of(" \t\r");
            field = field.substr(a, b - a + 1);
        }
        fields.push_back(std::move(field));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

/** Strict double parse; throws ParseError naming the location on failure. */
inline double parse_double_field(const std::string& field, std::size_t line_no,
                                 std::size_t col_no) {
    const std::string where = "line " + std::to_string(line_no) + ", field " +
                              std::to_string(col_no + 1);
    if (field.empty()) {
        throw ParseError("empty numeric field at " + where);
    }
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(field.c_str(), &end);
    if (end == field.c_str()) {
        throw ParseError("malformed number at " + where + ": '" + field + "'");
    }
    if (static_cast<std::size_t>(end - field.c_str()) != field.size()) {
        throw ParseError("trailing characters in numeric field at " + where + ": '" +
                         field + "'");
    }
    // ERANGE with a huge result is a genuine overflow; ERANGE with a tiny
    // result is gradual underflow and the value is the closest representable.
    if (errno == ERANGE && std::abs(value) == HUGE_VAL) {
        throw ParseError("number out of range at " + where + ": '" + field + "'");
    }
    return value;
}

/** True for lines that carry no data: blank or '#'-comment. */
inline bool is_skippable_line(const std::string& line) {
    const auto a = line.find_first_not_of(" \t\r");
    return a == std::string::npos || line[a] == '#';
}

}  // namespace nystrom::detail
