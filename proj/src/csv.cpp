#include "tikflow/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace tikflow {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot open for writing: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

void CsvWriter::sep() {
  if (col_++) out_ << ',';
}

void CsvWriter::cell(double v) {
  sep();
  out_ << format_double(v);
}

void CsvWriter::cell(const std::string& v) {
  sep();
  out_ << v;
}

void CsvWriter::cell_blank() { sep(); }

void CsvWriter::end_row() {
  out_ << '\n';
  col_ = 0;
}

CsvWriter::~CsvWriter() = default;

}  // namespace tikflow
