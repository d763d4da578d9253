// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace mmwbf {

using Cell = std::variant<double, long long, std::string>;

// Rectangular result table with ordered "# key: value" metadata lines.
struct Table {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_meta(std::string key, std::string value) { meta.emplace_back(std::move(key), std::move(value)); }

    void add_row(std::vector<Cell> row)
    {
        if (row.size() != columns.size())
            throw DomainError("row has " + std::to_string(row.size()) + " cells, table has " +
                              std::to_string(columns.size()) + " columns");
        rows.push_back(std::move(row));
    }

    std::size_t column(const std::string& name) const
    {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name)
                return i;
        throw DomainError("no column '" + name + "'");
    }

    double number(std::size_t row, const std::string& name) const
    {
        const Cell& c = rows.at(row).at(column(name));
        if (const double* d = std::get_if<double>(&c))
            return *d;
        if (const long long* i = std::get_if<long long>(&c))
            return static_cast<double>(*i);
        throw DomainError("column '" + name + "' is not numeric");
    }

    bool operator==(const Table&) const = default;
};

namespace detail {

inline std::string format_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s(buf);
    if (s.find_first_of(".eEn") == std::string::npos)
        s += ".0";
    return s;
}

inline std::string quote_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"')
            q += '"';
        q += c;
    }
    return q + '"';
}

// Reals carry a decimal point, exponent or non-finite marker; integers do not.
inline Cell parse_cell(const std::string& s, bool quoted)
{
    if (quoted || s.empty())
        return s;
    const bool looks_real = s.find_first_of(".eEn") != std::string::npos;
    try {
        std::size_t pos = 0;
        if (looks_real) {
            const double d = std::stod(s, &pos);
            if (pos == s.size())
                return d;
        } else {
            const long long v = std::stoll(s, &pos);
            if (pos == s.size())
                return v;
        }
    } catch (const std::exception&) {
    }
    return s;
}

inline std::string format_cell(const Cell& c)
{
    if (const double* d = std::get_if<double>(&c))
        return format_double(*d);
    if (const long long* i = std::get_if<long long>(&c))
        return std::to_string(*i);
    const std::string& s = std::get<std::string>(c);
    // strings that would read back as numbers (or empty) are quoted
    if (!s.empty() && std::holds_alternative<std::string>(parse_cell(s, false)))
        return quote_field(s);
    return "\"" + s + "\"";
}

inline std::vector<std::pair<std::string, bool>> split_record(std::istream& is, bool& ok)
{
    std::vector<std::pair<std::string, bool>> fields;
    std::string cur;
    bool quoted = false, in_quotes = false, any = false;
    ok = false;
    for (int ch; (ch = is.get()) != EOF;) {
        any = true;
        const char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (is.peek() == '"') {
                    cur += '"';
                    is.get();
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
            }
            continue;
        }
        if (c == '"') {
            in_quotes = quoted = true;
        } else if (c == ',') {
            fields.emplace_back(cur, quoted);
            cur.clear();
            quoted = false;
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (!any)
        return fields;
    fields.emplace_back(cur, quoted);
    ok = true;
    return fields;
}

} // namespace detail

// RFC 4180 body preceded by "# key: value" metadata; reals printed with 17
// significant digits so a parse restores them exactly.
inline void write_csv(std::ostream& os, const Table& t)
{
    for (const auto& [k, v] : t.meta) {
        std::istringstream lines(v);
        std::string line;
        bool first = true;
        while (std::getline(lines, line) || first) {
            os << "# " << k << ": " << line << '\n';
            first = false;
        }
    }
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? "," : "") << detail::quote_field(t.columns[i]);
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i)
            os << (i ? "," : "") << detail::format_cell(r[i]);
        os << '\n';
    }
}

// Inverse of write_csv. Repeated metadata keys are joined with newlines.
inline Table read_csv(std::istream& is)
{
    Table t;
    while (is.peek() == '#') {
        std::string line;
        std::getline(is, line);
        const std::size_t colon = line.find(": ");
        if (line.size() < 2 || colon == std::string::npos) {
            t.add_meta(line.substr(std::min<std::size_t>(2, line.size())), "");
            continue;
        }
        std::string key = line.substr(2, colon - 2), value = line.substr(colon + 2);
        if (!t.meta.empty() && t.meta.back().first == key)
            t.meta.back().second += "\n" + value;
        else
            t.add_meta(std::move(key), std::move(value));
    }
    bool ok = false;
    auto header = detail::split_record(is, ok);
    if (!ok)
        return t;
    for (auto& [f, q] : header)
        t.columns.push_back(f);
    for (;;) {
        auto rec = detail::split_record(is, ok);
        if (!ok)
            break;
        if (rec.size() == 1 && rec[0].first.empty() && !rec[0].second)
            continue;
        std::vector<Cell> row;
        for (auto& [f, q] : rec)
            row.push_back(detail::parse_cell(f, q));
        t.add_row(std::move(row));
    }
    return t;
}

inline void emit_csv(const Table& t, const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    write_csv(os, t);
    os.flush();
    if (!os)
        throw std::runtime_error("write to '" + path + "' failed");
}

} // namespace mmwbf
