#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sae::csv {

/// Splits one line on commas. Quoting is not supported; none of our files need it.
std::vector<std::string> split(std::string_view line);

/// Reads the next non-empty line (CR stripped). Returns false at end of stream.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

/// Shortest representation that round-trips exactly.
std::string format_double(double value);
/// Fixed notation with `digits` decimals.
std::string format_fixed(double value, int digits);

}  // namespace sae::csv
