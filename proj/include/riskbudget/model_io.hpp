#pragma once

#include "riskbudget/models.hpp"

#include <iosfwd>
#include <string>

namespace riskbudget {

// Model files are JSON documents
//   {"type": "tmix" | "gmix", "p": [...], "mu": [[...]], "scale": [[[...]]], "nu": [...]}
// with matrices row-major; "nu" is only read for "tmix". Errors (parse
// failures with line and column, invalid parameters, non-SPD matrices) throw
// InputError.

ReturnModel parse_model_json(const std::string& text, const std::string& source = "<model>");
ReturnModel read_model_file(const std::string& path);
std::string model_to_json(const ReturnModel& model);
void write_model_file(const std::string& path, const ReturnModel& model);

/// One return row per line. The header row is detected automatically when the
/// first field of the first line is not numeric.
ReturnSample read_sample_csv(std::istream& is, const std::string& source = "<sample>");
ReturnSample read_sample_file(const std::string& path);
void write_sample_csv(std::ostream& os, const ReturnSample& sample, bool header);

/// Reads a whole file; throws InputError when it cannot be opened.
std::string read_text_file(const std::string& path);

}  // namespace riskbudget
