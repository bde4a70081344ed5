#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace riskbudget {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

/// Fixed-point text with `digits` decimals, for human-readable tables.
std::string format_fixed(double x, int digits);

/// Parses a whole field as a double; throws InputError otherwise.
double parse_double(const std::string& field);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Writes one CSV record, quoting fields that contain separators, quotes or
/// line breaks.
void write_csv_row(std::ostream& os, const std::vector<std::string>& fields);

/// Reads RFC-4180 style CSV. With has_header the first record becomes the
/// header. Throws InputError with the offending line number on malformed input.
CsvTable read_csv(std::istream& is, bool has_header);

}  // namespace riskbudget
