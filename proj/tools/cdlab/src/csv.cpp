#include "cdlab/tools/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace cdlab::tools {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string format_number(std::size_t v) { return std::to_string(v); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' || c == '\r' ? ' ' : c;
  }
  return out + "\"";
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (!header_.empty() && row.size() != header_.size()) throw std::logic_error("row width differs from header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::render(const CsvStatus& status) const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out += ',';
      out += csv_field(fields[i]);
    }
    out += '\n';
  };
  if (!header_.empty()) line(header_);
  for (const auto& r : rows_) line(r);
  if (status.ok) {
    line({"status", "ok"});
  } else {
    line({"status", "error", status.kind, status.detail});
  }
  return out;
}

void CsvTable::write(const std::string& path, const CsvStatus& status) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << render(status);
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace cdlab::tools
