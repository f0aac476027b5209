#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace turntake {

/// Quotes a field when it contains a comma, quote or line break.
std::string csv_field(std::string_view s);

/// Splits CSV text into rows of fields (RFC 4180 quoting).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace turntake
