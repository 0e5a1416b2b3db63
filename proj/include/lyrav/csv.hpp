#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lyrav::csv {

// Quotes a field when it contains a comma, quote, or newline.
std::string quote(std::string_view field);

std::string join_row(const std::vector<std::string>& fields);

// Parses one CSV record (RFC-4180 quoting). Throws ValidationError on a
// dangling quote.
std::vector<std::string> parse_row(std::string_view line);

// Splits a whole document into records, honoring quoted newlines.
std::vector<std::vector<std::string>> parse(std::string_view doc);

}  // namespace lyrav::csv
