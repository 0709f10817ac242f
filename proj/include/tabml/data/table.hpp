#ifndef TABML_DATA_TABLE_HPP_
#define TABML_DATA_TABLE_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabml/core/matrix.hpp"

namespace tabml::data {

// A cell holds the trimmed source text, or nothing when the source token is
// one of the missing-value markers. Numbers stay textual until encoding so
// that labels such as "01" survive untouched.
using Cell = std::optional<std::string>;

struct RawTable {
  std::vector<std::string> column_names;
  std::vector<std::vector<Cell>> rows;
  std::string source_path;

  std::size_t num_rows() const { return rows.size(); }
  std::size_t num_cols() const { return column_names.size(); }
  std::optional<std::size_t> column_index(std::string_view name) const;
};

enum class TableFormat { kCsv, kTsv };

// True for "", NA, N/A, NaN, null, None in any letter case.
bool IsMissingToken(std::string_view token);

// Parses a complete token as a finite double.
std::optional<double> ParseNumber(std::string_view token);

std::string Trim(std::string_view s);
std::string ToLower(std::string_view s);

// Reads a CSV/TSV file, or a directory of them joined on their first shared
// column. Comment lines ("#") and blank lines are dropped.
RawTable ReadTable(const std::filesystem::path& path,
                   std::optional<TableFormat> format = std::nullopt);

// Parses in-memory text; `source` is only used in error messages.
RawTable ParseTable(std::string_view text, TableFormat format,
                    const std::string& source = "<memory>");

// Inner join of several tables on `key`. Non-key columns whose names collide
// get a ".<n>" suffix with the 1-based table index.
RawTable JoinTables(const std::vector<RawTable>& tables, const std::string& key);

// Keeps only the named columns, in the given order.
RawTable SelectColumns(const RawTable& table, const std::vector<std::string>& names);

}  // namespace tabml::data

#endif  // TABML_DATA_TABLE_HPP_
