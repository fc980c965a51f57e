#include "seroifr/csv.hpp"

#include <charconv>
#include <cstdio>

#include "seroifr/common.hpp"

namespace seroifr {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    std::size_t a = f.find_first_not_of(" \t");
    std::size_t b = f.find_last_not_of(" \t");
    f = (a == std::string::npos) ? std::string() : f.substr(a, b - a + 1);
  }
  return out;
}

}  // namespace

CsvTable::CsvTable(const std::filesystem::path& path) : file_(path.string()) {
  std::ifstream in(path);
  if (!in) fail(Errc::missing_file, "cannot open " + file_);
  std::string line;
  if (!std::getline(in, line)) fail(Errc::schema_violation, file_ + ": empty file (header row required)");
  auto header = split_line(line);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i].empty()) fail(Errc::schema_violation, file_ + ": empty header name in column " + std::to_string(i + 1));
    if (!col_index_.emplace(header[i], i).second)
      fail(Errc::schema_violation, file_ + ": duplicate header column '" + header[i] + "'");
  }
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_line(line);
    if (fields.size() != header.size())
      fail(Errc::schema_violation, file_ + " line " + std::to_string(cells_.size() + 2) + ": expected " +
                                       std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    cells_.push_back(std::move(fields));
  }
}

void CsvTable::bad(std::size_t row, const std::string& col, const std::string& what) const {
  fail(Errc::schema_violation,
       file_ + " line " + std::to_string(line_of(row)) + ", column '" + col + "': " + what);
}

const std::string& CsvTable::cell(std::size_t row, const std::string& col) const {
  auto it = col_index_.find(col);
  if (it == col_index_.end())
    fail(Errc::schema_violation, file_ + ": missing required column '" + col + "'");
  return cells_.at(row).at(it->second);
}

std::string CsvTable::str(std::size_t row, const std::string& col) const {
  const std::string& v = cell(row, col);
  if (v.empty()) bad(row, col, "value required");
  return v;
}

long CsvTable::integer(std::size_t row, const std::string& col) const {
  const std::string& v = cell(row, col);
  long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad(row, col, "expected integer, got '" + v + "'");
  return out;
}

double CsvTable::real(std::size_t row, const std::string& col) const {
  const std::string& v = cell(row, col);
  if (v.empty()) bad(row, col, "expected number, got empty field");
  try {
    std::size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) bad(row, col, "expected number, got '" + v + "'");
    return out;
  } catch (const std::exception&) {
    bad(row, col, "expected number, got '" + v + "'");
  }
}

std::optional<long> CsvTable::opt_integer(std::size_t row, const std::string& col) const {
  if (cell(row, col).empty()) return std::nullopt;
  return integer(row, col);
}

void CsvTable::require_columns(const std::vector<std::string>& names) const {
  for (const auto& n : names)
    if (!has_column(n)) fail(Errc::schema_violation, file_ + ": missing required column '" + n + "'");
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), n_cols_(header.size()), file_(path.string()) {
  if (!out_) fail(Errc::missing_file, "cannot write " + file_);
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != n_cols_)
    fail(Errc::schema_violation, file_ + ": row width " + std::to_string(fields.size()) +
                                     " does not match header width " + std::to_string(n_cols_));
  for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
  out_ << "\n";
}

std::string CsvWriter::num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace seroifr
