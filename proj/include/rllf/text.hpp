#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rllf::text {

// Shortest representation that reads back to the same double.
std::string format_double(double x);
std::string format_fixed(double x, int decimals);

std::string trim(std::string_view s);
std::string lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Whole-string parses; throw std::invalid_argument naming `what`.
double parse_double(std::string_view s, const std::string& what);
long long parse_int(std::string_view s, const std::string& what);
bool parse_bool(std::string_view s, const std::string& what);

}  // namespace rllf::text
