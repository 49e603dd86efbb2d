#pragma once

#include <string>
#include <vector>

namespace sugar {

/// Shortest decimal that round-trips the double exactly.
std::string format_double(double v);

/// Accumulates a comma-separated table with a header row.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& empty();
  void end_row();

  const std::string& str() const { return out_; }

 private:
  std::size_t columns_;
  std::size_t in_row_ = 0;
  std::string out_;
};

}  // namespace sugar
