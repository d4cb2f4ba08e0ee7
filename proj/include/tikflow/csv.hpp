#pragma once

// CSV writing helpers: comma separators, '\n' line endings, header row,
// shortest round-trip decimal formatting for doubles.

#include <fstream>
#include <string>
#include <vector>

namespace tikflow {

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void cell(double v);
  void cell(const std::string& v);
  void cell_blank();
  void end_row();
  ~CsvWriter();

 private:
  std::ofstream out_;
  std::size_t col_ = 0;
  void sep();
};

}  // namespace tikflow
