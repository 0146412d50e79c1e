// Delimited-text input: header row plus numeric columns. Parse failures
// carry 1-based row/column locations; nothing is coerced silently.
#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bootci/dataset.hpp"
#include "bootci/errors.hpp"

namespace bootci {

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;  // column-major, same order as header

  std::int64_t rows() const {
    return columns.empty() ? 0 : static_cast<std::int64_t>(columns[0].size());
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_line(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline RawTable read_table(std::istream& in, char delim) {
  RawTable table;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty input: no header row");
  for (auto cell : detail::split_line(line, delim)) {
    const auto name = detail::trim(cell);
    if (name.empty()) throw ParseError("empty column name in header");
    table.header.emplace_back(name);
  }
  table.columns.assign(table.header.size(), {});
  std::int64_t row = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_line(line, delim);
    if (cells.size() != table.header.size()) {
      throw ParseError("row " + std::to_string(row) + ": expected " +
                       std::to_string(table.header.size()) + " fields, got " +
                       std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto cell = detail::trim(cells[c]);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw ParseError("row " + std::to_string(row) + ", column " +
                         std::to_string(c + 1) + " (" + table.header[c] +
                         "): not a number: '" + std::string(cell) + "'");
      }
      table.columns[c].push_back(value);
    }
  }
  if (table.rows() == 0) throw ParseError("no data rows");
  return table;
}

inline RawTable read_table_file(const std::string& path, char delim) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open input file: " + path);
  return read_table(in, delim);
}

// Response column by name; every other column becomes a covariate, with an
// intercept prepended.
inline Dataset dataset_from_table(const RawTable& table, const std::string& response) {
  std::int64_t response_col = -1;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c] == response) response_col = static_cast<std::int64_t>(c);
  }
  if (response_col < 0) throw ParseError("response column not found: " + response);
  std::vector<std::vector<double>> covariates;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (static_cast<std::int64_t>(c) == response_col) continue;
    covariates.push_back(table.columns[c]);
    names.push_back(table.header[c]);
  }
  return Dataset::from_covariates(covariates, table.columns[static_cast<std::size_t>(response_col)],
                                  names);
}

}  // namespace bootci
