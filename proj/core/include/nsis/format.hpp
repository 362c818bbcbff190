#pragma once

#include <string>
#include <string_view>

namespace nsis {

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

// Inverse of format_double; throws input_error on malformed text.
double parse_double(std::string_view text);

} // namespace nsis
