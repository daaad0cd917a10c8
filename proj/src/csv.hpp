#pragma once

// Minimal CSV helpers shared by the readers and writers. Fields are
// comma-separated; surrounding whitespace is trimmed; double quotes may wrap a
// field containing commas.

#include <charconv>
#include <cctype>
#include <cstdio>
#include <initializer_list>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "parkcast/error.hpp"

namespace parkcast::detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back(trim(field));
            field.clear();
        } else {
            field += c;
        }
    }
    out.emplace_back(trim(field));
    return out;
}

inline std::optional<double> to_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<long long> to_int(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

/// Shortest representation that round-trips.
inline std::string format_number(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s(buf);
    if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) {
        if (!s.empty() && s.front() == '-') s.erase(0, 1);
    }
    return s;
}

class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    /// Reads the header row and compares it against `expected`.
    void expect_header(std::initializer_list<std::string_view> expected) {
        std::string line;
        if (!read_line(line)) throw InputError("missing CSV header");
        auto fields = split_csv_line(strip_bom(line));
        bool ok = fields.size() == expected.size();
        if (ok) {
            std::size_t i = 0;
            for (auto name : expected) ok = ok && fields[i++] == name;
        }
        if (!ok) {
            std::string want;
            for (auto name : expected) want += (want.empty() ? "" : ",") + std::string(name);
            throw InputError("malformed CSV header '" + line + "', expected '" + want + "'");
        }
    }

    /// Next non-empty data row; false at end of input.
    bool next(std::vector<std::string>& row) {
        std::string line;
        while (read_line(line)) {
            if (trim(line).empty()) continue;
            row = split_csv_line(line);
            return true;
        }
        return false;
    }

    /// 1-based line number of the last line read.
    std::size_t line() const { return line_; }

private:
    bool read_line(std::string& line) {
        if (!std::getline(in_, line)) return false;
        ++line_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }

    static std::string_view strip_bom(std::string_view s) {
        if (s.size() >= 3 && s.substr(0, 3) == "\xEF\xBB\xBF") s.remove_prefix(3);
        return s;
    }

    std::istream& in_;
    std::size_t line_ = 0;
};

}  // namespace parkcast::detail
