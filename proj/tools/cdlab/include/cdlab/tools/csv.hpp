#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cdlab/truncated_operator.hpp"

namespace cdlab::tools {

// Shortest of: 17 significant digits, '.' decimal point, no locale.
std::string format_number(double v);
std::string format_number(std::size_t v);

// Trailing row of every CSV: "status,ok" or "status,error,<kind>,<detail>".
struct CsvStatus {
  bool ok = true;
  std::string kind;
  std::string detail;
};

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header = {}) : header_(std::move(header)) {}

  void set_header(std::vector<std::string> header) { header_ = std::move(header); }
  void add_row(std::vector<std::string> row);
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string render(const CsvStatus& status) const;
  // Writes render(status) to path; throws std::runtime_error on I/O failure.
  void write(const std::string& path, const CsvStatus& status) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Quotes a field when it contains a comma, quote or newline.
std::string csv_field(const std::string& s);

}  // namespace cdlab::tools
