#include "cwl/csv.hpp"

#include <charconv>
#include <fstream>

#include "cwl/error.hpp"

namespace cwl::csv {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

void for_each_row(const std::filesystem::path& path,
                  const std::function<void(std::size_t row,
                                           std::span<const std::string_view> cells)>& on_row) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("MissingFile", "cannot open " + path.string());
  std::string line;
  std::vector<std::string_view> cells;
  std::size_t row = 0;
  std::size_t arity = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    cells.clear();
    std::string_view view(line);
    std::size_t start = 0;
    while (true) {
      std::size_t pos = view.find(',', start);
      if (pos == std::string_view::npos) {
        cells.push_back(view.substr(start));
        break;
      }
      cells.push_back(view.substr(start, pos - start));
      start = pos + 1;
    }
    if (arity == 0) {
      arity = cells.size();
    } else if (cells.size() != arity) {
      throw Error("MalformedCsv", path.string() + ": row " + std::to_string(row) + " has " +
                                      std::to_string(cells.size()) + " fields, expected " +
                                      std::to_string(arity));
    }
    on_row(row, cells);
  }
  if (arity == 0) throw Error("MalformedCsv", path.string() + ": empty file");
}

Table read_table(const std::filesystem::path& path) {
  Table table;
  table.source = path;
  for_each_row(path, [&](std::size_t, std::span<const std::string_view> cells) {
    std::vector<std::string> owned(cells.begin(), cells.end());
    if (table.header.empty()) {
      table.header = std::move(owned);
    } else {
      table.rows.push_back(std::move(owned));
    }
  });
  return table;
}

std::optional<double> parse_cell(std::string_view cell, const std::filesystem::path& source,
                                 std::size_t row) {
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw Error("MalformedCsv", source.string() + ": row " + std::to_string(row) +
                                    ": not a number '" + std::string(cell) + "'");
  }
  return value;
}

double parse_number(std::string_view text, std::string_view what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error("InvalidConfig",
                std::string(what) + ": expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

long long parse_integer(std::string_view text, std::string_view what) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error("InvalidConfig",
                std::string(what) + ": expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

std::string format(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string format_sig(double value, int significant_digits) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general,
                                 significant_digits);
  return std::string(buf, ptr);
}

}  // namespace cwl::csv
