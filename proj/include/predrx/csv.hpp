#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace predrx::csv {

std::vector<std::string> split_line(const std::string& line, char delim = ',');

// Whole-file reader with 1-based line numbers for error reporting.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> row_lines;
};

Table read_file(const std::string& path);

double parse_double(const std::string& field, const std::string& what, int line);
std::int64_t parse_int(const std::string& field, const std::string& what, int line);

// Fixed-format float fields so emitted artifacts are stable byte-for-byte.
std::string fmt(double v, int precision = 10);       // %.{p}g
std::string fmt_fixed(double v, int decimals);       // %.{d}f

class Writer {
 public:
  explicit Writer(const std::string& path);
  void header(const std::vector<std::string>& cols);
  void row(const std::vector<std::string>& fields);
  void close();

 private:
  std::ofstream out_;
  std::string path_;
};

}  // namespace predrx::csv
