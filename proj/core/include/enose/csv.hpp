#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace enose {

// Shortest round-trip decimal form (via std::to_chars); parsing it back
// recovers the exact same bits.
std::string format_double(double value);

// Strict finite-double parse; the whole field must be consumed.
double parse_double(std::string_view field, const std::string& context);

long parse_long(std::string_view field, const std::string& context);

std::vector<std::string_view> split_csv_line(std::string_view line);

}  // namespace enose
