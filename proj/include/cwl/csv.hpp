#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cwl::csv {

// Minimal reader for the project's flat CSV files: comma separated, no
// quoting, '.' decimals, LF endings. An empty cell parses as "missing".
struct Table {
  std::filesystem::path source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Throws MissingFile if the path cannot be opened and MalformedCsv on row
// arity mismatch (row numbers are 1-based and count the header line).
Table read_table(const std::filesystem::path& path);

// Streams a file row by row. The first callback invocation (row 1) is the
// header; every later row must match its arity. Views are valid only for the
// duration of the callback.
void for_each_row(const std::filesystem::path& path,
                  const std::function<void(std::size_t row,
                                           std::span<const std::string_view> cells)>& on_row);

std::vector<std::string> split(std::string_view line, char sep = ',');

// Empty cell -> nullopt. Throws MalformedCsv on non-numeric text.
std::optional<double> parse_cell(std::string_view cell, const std::filesystem::path& source,
                                 std::size_t row);

double parse_number(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);

// Shortest representation that round-trips to the same double.
std::string format(double value);
// Fixed significant-digit output used for bulky signal files.
std::string format_sig(double value, int significant_digits);

}  // namespace cwl::csv
