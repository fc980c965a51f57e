#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace seroifr {

/// Minimal CSV table reader: UTF-8, comma-delimited, one header row, no
/// quoting (identifiers and numbers only). Field accessors throw
/// schema_violation errors naming file, row and column.
class CsvTable {
 public:
  explicit CsvTable(const std::filesystem::path& path);

  std::size_t rows() const { return cells_.size(); }
  const std::string& file() const { return file_; }

  /// 1-based line number of data row r (header is line 1), for diagnostics.
  std::size_t line_of(std::size_t r) const { return r + 2; }

  bool has_column(const std::string& name) const { return col_index_.count(name) > 0; }
  const std::string& cell(std::size_t row, const std::string& col) const;

  std::string str(std::size_t row, const std::string& col) const;
  long integer(std::size_t row, const std::string& col) const;
  double real(std::size_t row, const std::string& col) const;
  std::optional<long> opt_integer(std::size_t row, const std::string& col) const;  // empty cell -> nullopt

  void require_columns(const std::vector<std::string>& names) const;

 private:
  [[noreturn]] void bad(std::size_t row, const std::string& col, const std::string& what) const;

  std::string file_;
  std::map<std::string, std::size_t> col_index_;
  std::vector<std::vector<std::string>> cells_;
};

/// Row-oriented CSV writer with fixed round-trippable double formatting.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);

  static std::string num(double v);  // max_digits10, round-trip exact
  static std::string num(long v) { return std::to_string(v); }

 private:
  std::ofstream out_;
  std::size_t n_cols_;
  std::string file_;
};

}  // namespace seroifr
