#include "predrx/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace predrx::csv {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);
  Table t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_line(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
    } else {
      t.rows.push_back(std::move(fields));
      t.row_lines.push_back(lineno);
    }
  }
  return t;
}

double parse_double(const std::string& field, const std::string& what, int line) {
  char* end = nullptr;
  double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0')
    throw std::runtime_error("csv: line " + std::to_string(line) + ": bad " + what + " '" + field + "'");
  return v;
}

std::int64_t parse_int(const std::string& field, const std::string& what, int line) {
  char* end = nullptr;
  long long v = std::strtoll(field.c_str(), &end, 10);
  if (end == field.c_str() || *end != '\0')
    throw std::runtime_error("csv: line " + std::to_string(line) + ": bad " + what + " '" + field + "'");
  return static_cast<std::int64_t>(v);
}

std::string fmt(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

std::string fmt_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

Writer::Writer(const std::string& path) : out_(path), path_(path) {
  if (!out_) throw std::runtime_error("csv: cannot write " + path);
}

void Writer::header(const std::vector<std::string>& cols) { row(cols); }

void Writer::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
}

void Writer::close() {
  out_.close();
  if (!out_.good()) throw std::runtime_error("csv: write failed for " + path_);
}

}  // namespace predrx::csv
