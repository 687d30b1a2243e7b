#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace trr::detail {

// Fixed "%.10g" formatting keeps re-runs byte-comparable.
inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class CsvFile {
 public:
  CsvFile(const std::string& path, const std::string& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path);
    out_ << header << "\n";
  }

  void row(const std::string& line) { out_ << line << "\n"; }

 private:
  std::ofstream out_;
};

}  // namespace trr::detail
