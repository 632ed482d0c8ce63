#include "ageopt/text.hpp"

#include "ageopt/common.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>

namespace ageopt::text {

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  for (char ch : line) {
    if (ch == ',' || ch == ';' || ch == '\t' || ch == ' ' || ch == '\r') {
      if (!current.empty()) fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) fields.push_back(std::move(current));
  return fields;
}

bool skip_line(std::string_view line) {
  for (char ch : line) {
    if (ch == '#') return true;
    if (ch != ' ' && ch != '\t' && ch != '\r') return false;
  }
  return true;
}

double to_double(const std::string& field, const std::string& context) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0' || !std::isfinite(v))
    fail(ErrorCode::io, context + ": not a number: '" + field + "'");
  return v;
}

long to_long(const std::string& field, const std::string& context) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    fail(ErrorCode::io, context + ": not an integer: '" + field + "'");
  return v;
}

std::string format(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace ageopt::text
