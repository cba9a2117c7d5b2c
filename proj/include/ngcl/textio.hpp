#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ngcl {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char delim);

// Full-string parses; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view s);
std::optional<long> parse_long(std::string_view s);

// Shortest text that parses back to the identical double.
std::string format_double(double v);

}  // namespace ngcl
