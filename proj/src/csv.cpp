#include "riskbudget/csv.hpp"

#include "riskbudget/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

namespace riskbudget {

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string format_fixed(double x, int digits) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::fixed, digits);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& field) {
    std::size_t begin = 0;
    std::size_t end = field.size();
    while (begin < end && (field[begin] == ' ' || field[begin] == '\t')) {
        ++begin;
    }
    while (end > begin && (field[end - 1] == ' ' || field[end - 1] == '\t' || field[end - 1] == '\r')) {
        --end;
    }
    if (begin < end && field[begin] == '+') {
        ++begin;
    }
    double value = 0;
    const auto res = std::from_chars(field.data() + begin, field.data() + end, value);
    if (res.ec != std::errc() || res.ptr != field.data() + end || begin == end) {
        throw InputError("not a number: '" + field + "'");
    }
    return value;
}

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            os << ',';
        }
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\n\r") == std::string::npos) {
            os << f;
            continue;
        }
        os << '"';
        for (char c : f) {
            if (c == '"') {
                os << '"';
            }
            os << c;
        }
        os << '"';
    }
    os << '\n';
}

CsvTable read_csv(std::istream& is, bool has_header) {
    CsvTable table;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    long line = 1;
    long record_line = 1;

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        const bool blank = record.size() == 1 && record[0].empty();
        if (!blank) {
            if (has_header && table.header.empty() && table.rows.empty()) {
                table.header = record;
            } else {
                const std::size_t expected =
                    !table.header.empty() ? table.header.size()
                                          : (table.rows.empty() ? record.size() : table.rows[0].size());
                if (record.size() != expected) {
                    throw InputError("CSV line " + std::to_string(record_line) + ": expected " +
                                     std::to_string(expected) + " fields, found " +
                                     std::to_string(record.size()));
                }
                table.rows.push_back(record);
            }
        }
        record.clear();
        record_line = line;
    };

    char c = 0;
    while (is.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (is.peek() == '"') {
                    is.get(c);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') {
                    ++line;
                }
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r') {
            continue;
        } else if (c == '\n') {
            ++line;
            end_record();
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) {
        throw InputError("CSV line " + std::to_string(record_line) + ": unterminated quoted field");
    }
    if (!field.empty() || !record.empty()) {
        end_record();
    }
    return table;
}

}  // namespace riskbudget
