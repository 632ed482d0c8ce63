#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

// Delimited-text helpers shared by the file readers and writers.
namespace ageopt::text {

/// Splits on commas, semicolons, tabs and spaces; empty fields are dropped.
std::vector<std::string> split_fields(std::string_view line);

/// True for blank lines and lines starting with '#'.
bool skip_line(std::string_view line);

double to_double(const std::string& field, const std::string& context);
long to_long(const std::string& field, const std::string& context);

/// Shortest decimal form that round-trips to the same double.
std::string format(double value);

}  // namespace ageopt::text
