#include "phenomap/csv.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "phenomap/error.hpp"

namespace phenomap::csv {

std::vector<Row> parse(std::string_view text) {
    std::vector<Row> rows;
    std::size_t line = 1;
    std::size_t i = 0;
    const std::size_t n = text.size();

    while (i < n) {
        // Blank line.
        if (text[i] == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (text[i] == '\r' && i + 1 < n && text[i + 1] == '\n') {
            ++line;
            i += 2;
            continue;
        }

        Row row;
        row.line = line;
        std::string field;
        bool done = false;
        while (!done) {
            field.clear();
            if (i < n && text[i] == '"') {
                const std::size_t open_line = line;
                ++i;
                bool closed = false;
                while (i < n) {
                    char c = text[i];
                    if (c == '"') {
                        if (i + 1 < n && text[i + 1] == '"') {
                            field.push_back('"');
                            i += 2;
                            continue;
                        }
                        ++i;
                        closed = true;
                        break;
                    }
                    if (c == '\n') ++line;
                    field.push_back(c);
                    ++i;
                }
                if (!closed) {
                    throw InputError("line " + std::to_string(open_line) +
                                     ": unterminated quoted field");
                }
                const bool crlf = i + 1 < n && text[i] == '\r' && text[i + 1] == '\n';
                if (i < n && text[i] != ',' && text[i] != '\n' && !crlf) {
                    throw InputError("line " + std::to_string(line) +
                                     ": unexpected character after closing quote");
                }
            } else {
                while (i < n && text[i] != ',' && text[i] != '\n') {
                    if (text[i] == '\r' && i + 1 < n && text[i + 1] == '\n') break;
                    if (text[i] == '"') {
                        throw InputError("line " + std::to_string(line) +
                                         ": quote inside unquoted field");
                    }
                    field.push_back(text[i]);
                    ++i;
                }
            }
            row.fields.push_back(field);

            if (i >= n) {
                done = true;
            } else if (text[i] == ',') {
                ++i;
            } else if (text[i] == '\n') {
                ++i;
                ++line;
                done = true;
            } else if (text[i] == '\r') {
                i += 2;
                ++line;
                done = true;
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t j = 0; j < fields.size(); ++j) {
        if (j > 0) out.push_back(',');
        out += escape(fields[j]);
    }
    out.push_back('\n');
    return out;
}

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw Error("format_double: conversion failed");
    return std::string(buf, end);
}

double parse_double(std::string_view text, std::string_view what) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty()) {
        throw InputError("invalid number '" + std::string(text) + "' for " + std::string(what));
    }
    return value;
}

std::size_t parse_size(std::string_view text, std::string_view what) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw InputError("invalid integer '" + std::string(text) + "' for " + std::string(what));
    }
    return value;
}

}  // namespace phenomap::csv
