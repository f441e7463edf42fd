#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hda {

// Shortest round-trip decimal representation ("nan"/"inf" for non-finite).
std::string fmt_double(double value);
// Fixed-precision formatting for human-facing tables.
std::string fmt_fixed(double value, int digits);

std::string_view trim(std::string_view s);
std::vector<std::string> split_csv_line(std::string_view line);
// Throws Parse with `context` in the message.
double parse_double(std::string_view text, const std::string& context);

}  // namespace hda
