#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace recharge::text {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char delim);
std::optional<double> to_double(std::string_view s);
std::optional<long long> to_integer(std::string_view s);
std::string lower(std::string_view s);

// 17 significant digits; round-trips exactly.
std::string format_double(double v);
// Shortest decimal that parses back to the same double.
std::string format_shortest(double v);

std::string read_file(const std::string& path);

}  // namespace recharge::text
