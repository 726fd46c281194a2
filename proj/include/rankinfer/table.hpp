#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace rankinfer {

// Rectangular table of named columns read from CSV: comma separated, first
// row is the header, '.' decimal separator, double-quoted fields may contain
// commas and doubled quotes. Cells are kept as text; typed access converts on
// demand.
class TableData {
 public:
  TableData() = default;
  TableData(std::vector<std::string> names, std::vector<std::vector<std::string>> columns);

  // Throws InputError on ragged rows, duplicate or empty headers, or a file
  // with no header.
  static TableData parse_csv(std::string_view text);
  static TableData parse_csv(std::istream& in);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  bool has_column(std::string_view name) const;

  // Raw cells. Throws MissingColumn.
  const std::vector<std::string>& text(std::string_view name) const;

  // Numeric cells. Empty, "NA" and "NaN" cells raise MissingValues; other
  // unparsable cells raise InputError naming the row.
  std::vector<double> numeric(std::string_view name) const;

  // True when every cell is a missing-value marker or parses as a number.
  bool is_numeric(std::string_view name) const;

 private:
  std::size_t index_of(std::string_view name) const;

  std::vector<std::string> names_;
  std::vector<std::vector<std::string>> columns_;
  std::size_t rows_ = 0;
};

bool is_missing_cell(std::string_view cell);

// Strict full-cell number parse (surrounding blanks allowed).
bool parse_number(std::string_view cell, double& out);

}  // namespace rankinfer
