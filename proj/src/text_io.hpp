// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

// Small text helpers shared by the CSV readers and writers.

#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "llp/error.hpp"

namespace llp::text {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

// Splits into lines, dropping blank ones; yields (1-based line number, text).
inline std::vector<std::pair<std::size_t, std::string_view>> lines(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string_view>> out;
    std::size_t number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find('\n', start);
        auto end = pos == std::string_view::npos ? text.size() : pos;
        ++number;
        auto line = trim(text.substr(start, end - start));
        if (!line.empty()) out.emplace_back(number, line);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_finite(std::string_view field, std::size_t line) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
        throw FormatError("line " + std::to_string(line) + ": not a finite number: '" + std::string(field) + "'");
    }
    return value;
}

template <typename Int>
Int parse_int(std::string_view field, std::size_t line) {
    Int value{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw FormatError("line " + std::to_string(line) + ": not an integer: '" + std::string(field) + "'");
    }
    return value;
}

// Shortest representation that reads back to the identical double.
inline void append_double(std::string& out, double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    out.append(buf, ptr);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

} // namespace llp::text
