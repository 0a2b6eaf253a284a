#include "enose/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

namespace enose {

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view field, const std::string& context) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw std::runtime_error(context + ": malformed number '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw std::runtime_error(context + ": non-finite value '" + std::string(field) + "'");
  }
  return value;
}

long parse_long(std::string_view field, const std::string& context) {
  long value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw std::runtime_error(context + ": malformed integer '" + std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace enose
