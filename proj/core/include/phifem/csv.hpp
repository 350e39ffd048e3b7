#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace phifem {

/// Deterministic CSV writer: fixed significant-digit formatting, no locale.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> columns, int precision = 12)
      : out_(path), precision_(precision) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out_ << ',';
      out_ << columns[i];
    }
    out_ << '\n';
    n_cols_ = columns.size();
  }

  void cell(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision_, v);
    raw(buf);
  }
  void cell(int v) { raw(std::to_string(v)); }
  void cell(const std::string& s) { raw(s); }

  void end_row() {
    out_ << '\n';
    col_ = 0;
  }

 private:
  void raw(const std::string& s) {
    if (col_) out_ << ',';
    out_ << s;
    ++col_;
  }
  std::ofstream out_;
  int precision_;
  std::size_t n_cols_ = 0;
  std::size_t col_ = 0;
};

/// Numeric table reader: header line optional, '#' comments skipped.
std::vector<std::vector<double>> read_csv_table(const std::string& path);

}  // namespace phifem
