#pragma once

// Minimal CSV helpers shared by the file-format readers/writers.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "adds/model.hpp"

namespace adds::csv {

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

inline std::int64_t parse_int(const std::string& field, const std::string& what, long line_no) {
    const std::string t = trim(field);
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw ParseError("line " + std::to_string(line_no) + ": " + what +
                         " is not an integer: '" + field + "'");
    return value;
}

inline double parse_double(const std::string& field, const std::string& what, long line_no) {
    const std::string t = trim(field);
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(t, &pos);
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": " + what +
                         " is not a number: '" + field + "'");
    }
    if (pos != t.size())
        throw ParseError("line " + std::to_string(line_no) + ": " + what +
                         " is not a number: '" + field + "'");
    return value;
}

// Maps header names to column indices; errors name the missing column.
inline std::vector<std::size_t> header_indices(const std::vector<std::string>& header,
                                               const std::vector<std::string>& required,
                                               const std::string& path) {
    std::vector<std::size_t> idx;
    for (const auto& name : required) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw ParseError(path + ": missing column '" + name + "'");
        idx.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    return idx;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "' for reading");
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    return out;
}

}  // namespace adds::csv
