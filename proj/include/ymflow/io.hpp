/// @file io.hpp
/// @brief Locale-independent number formatting, CSV reading/writing and the
///        flat key = value configuration format.
#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ymflow/errors.hpp"

namespace ymflow::io {

/// Shortest decimal string that round-trips to the same double. NaN and
/// infinities are written as nan / inf / -inf.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

/// Parses a double with from_chars (no locale); accepts nan / inf.
inline double parse_number(std::string_view text, std::string_view what = "value") {
    const std::string s = trim(text);
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty())
        throw InvalidConfig("cannot parse " + std::string(what) + " '" + s + "' as a number");
    return v;
}

inline long long parse_integer(std::string_view text, std::string_view what = "value") {
    const std::string s = trim(text);
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty())
        throw InvalidConfig("cannot parse " + std::string(what) + " '" + s + "' as an integer");
    return v;
}

inline std::vector<double> parse_number_list(std::string_view text, std::string_view what = "list") {
    std::vector<double> out;
    std::string item;
    std::istringstream in{std::string(text)};
    while (std::getline(in, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(parse_number(item, what));
    }
    return out;
}

/// Header row plus numeric rows, written with format_number.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw InvalidConfig("cannot open " + path.string() + " for writing");
        write_fields(header);
    }

    void row(const std::vector<double>& values) {
        std::vector<std::string> fields;
        fields.reserve(values.size());
        for (double v : values) fields.push_back(format_number(v));
        write_fields(fields);
    }

    void row_text(const std::vector<std::string>& fields) { write_fields(fields); }

private:
    void write_fields(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

    std::ofstream out_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw InvalidConfig("CSV column '" + std::string(name) + "' missing");
    }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open " + path.string());
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw InvalidConfig(path.string() + " is empty");
    {
        std::istringstream hs(line);
        std::string field;
        while (std::getline(hs, field, ',')) table.header.push_back(trim(field));
    }
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) row.push_back(parse_number(field, path.filename().string()));
        if (row.size() != table.header.size())
            throw InvalidConfig(path.string() + ": row width differs from header");
        table.rows.push_back(std::move(row));
    }
    return table;
}

/// Ordered key -> value map from "key = value" lines; '#' starts a comment.
using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_key_values(std::istream& in, std::string_view source = "config") {
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidConfig(std::string(source) + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        if (key.empty()) throw InvalidConfig(std::string(source) + ":" + std::to_string(lineno) + ": empty key");
        kv[key] = trim(std::string_view(line).substr(eq + 1));
    }
    return kv;
}

inline KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open config " + path.string());
    return parse_key_values(in, path.string());
}

}  // namespace ymflow::io
