#pragma once

// Small text helpers shared by every file format in the library: shortest
// round-trip float formatting, strict number parsing and comma splitting.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pint/error.hpp"

namespace pint::csv {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw Error("cannot format double");
    return std::string(buf, end);
}

inline std::string format(std::uint64_t v) { return std::to_string(v); }

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

inline bool try_parse(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

inline double parse_double(std::string_view s, std::size_t line) {
    double v = 0.0;
    if (!try_parse(s, v)) throw ParseError("not a number: '" + std::string(s) + "'", line);
    return v;
}

inline long long parse_int(std::string_view s, std::size_t line) {
    s = trim(s);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw ParseError("not an integer: '" + std::string(s) + "'", line);
    return v;
}

/// Reads a whole file into lines; throws InvalidInput when it cannot be opened.
inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "' for reading");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

inline std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
    return out;
}

/// Parses `#tag,key=value,key=value` metadata lines into `meta`; returns the tag.
inline std::string parse_meta_line(std::string_view line, std::map<std::string, std::string>& meta,
                                   std::size_t line_no) {
    if (line.empty() || line.front() != '#') throw ParseError("expected metadata line", line_no);
    line.remove_prefix(1);
    auto parts = split(line);
    std::string tag;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const auto eq = parts[k].find('=');
        if (eq == std::string_view::npos) {
            if (k == 0) {
                tag = std::string(parts[k]);
                continue;
            }
            throw ParseError("expected key=value, got '" + std::string(parts[k]) + "'", line_no);
        }
        meta[std::string(trim(parts[k].substr(0, eq)))] = std::string(trim(parts[k].substr(eq + 1)));
    }
    return tag;
}

}  // namespace pint::csv
