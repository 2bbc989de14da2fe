#ifndef PHENOMAP_CSV_HPP
#define PHENOMAP_CSV_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace phenomap::csv {

/// One parsed record; `line` is the 1-based line on which the record starts.
struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// RFC 4180 reader. Accepts LF or CRLF record separators and skips blank
/// lines. Throws InputError (with the line number) on an unterminated quoted
/// field or stray characters after a closing quote.
std::vector<Row> parse(std::string_view text);

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

/// Joins fields with commas and terminates the record with LF.
std::string format_row(const std::vector<std::string>& fields);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Strict decimal parse of a whole field; throws InputError naming `what`.
double parse_double(std::string_view text, std::string_view what);

/// Strict non-negative integer parse; throws InputError naming `what`.
std::size_t parse_size(std::string_view text, std::string_view what);

}  // namespace phenomap::csv

#endif
