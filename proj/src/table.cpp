#include "rankinfer/table.hpp"

#include <charconv>
#include <iterator>
#include <set>
#include <sstream>

#include "rankinfer/errors.hpp"

namespace rankinfer {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Splits CSV text into records. Handles quoted fields and CRLF endings.
std::vector<std::vector<std::string>> split_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !trim(field).empty()) {
          throw InputError("CSV line " + std::to_string(line) + ": stray quote inside field");
        }
        field.clear();
        quoted = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (quoted) throw InputError("CSV input ends inside a quoted field");
  if (!field.empty() || !record.empty()) end_record();
  return records;
}

}  // namespace

bool is_missing_cell(std::string_view cell) {
  cell = trim(cell);
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan";
}

bool parse_number(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

TableData::TableData(std::vector<std::string> names, std::vector<std::vector<std::string>> columns)
    : names_(std::move(names)), columns_(std::move(columns)) {
  if (names_.size() != columns_.size()) throw InputError("column count mismatch");
  std::set<std::string> seen;
  for (const auto& name : names_) {
    if (name.empty()) throw InputError("CSV header contains an empty column name");
    if (!seen.insert(name).second) throw InputError("duplicate column name '" + name + "'");
  }
  rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (const auto& col : columns_) {
    if (col.size() != rows_) throw InputError("columns differ in length");
  }
}

TableData TableData::parse_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  auto records = split_records(text);
  if (records.empty()) throw InputError("CSV input is empty (no header row)");
  std::vector<std::string> names;
  for (const auto& h : records.front()) names.emplace_back(trim(h));
  std::vector<std::vector<std::string>> columns(names.size());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != names.size()) {
      throw InputError("ragged CSV: data row " + std::to_string(r) + " has " +
                       std::to_string(records[r].size()) + " fields, header has " +
                       std::to_string(names.size()));
    }
    for (std::size_t c = 0; c < names.size(); ++c) columns[c].push_back(std::move(records[r][c]));
  }
  return TableData(std::move(names), std::move(columns));
}

TableData TableData::parse_csv(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_csv(std::string_view(text));
}

bool TableData::has_column(std::string_view name) const {
  for (const auto& n : names_) {
    if (n == name) return true;
  }
  return false;
}

std::size_t TableData::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  throw MissingColumn("column '" + std::string(name) + "' not found");
}

const std::vector<std::string>& TableData::text(std::string_view name) const {
  return columns_[index_of(name)];
}

std::vector<double> TableData::numeric(std::string_view name) const {
  const auto& cells = text(name);
  std::vector<double> out(cells.size());
  for (std::size_t r = 0; r < cells.size(); ++r) {
    if (is_missing_cell(cells[r])) {
      throw MissingValues("column '" + std::string(name) + "' has a missing value in data row " +
                          std::to_string(r + 1));
    }
    if (!parse_number(cells[r], out[r])) {
      throw InputError("column '" + std::string(name) + "', data row " + std::to_string(r + 1) +
                       ": '" + cells[r] + "' is not a number");
    }
  }
  return out;
}

bool TableData::is_numeric(std::string_view name) const {
  double dummy;
  for (const auto& cell : text(name)) {
    if (!is_missing_cell(cell) && !parse_number(cell, dummy)) return false;
  }
  return true;
}

}  // namespace rankinfer
