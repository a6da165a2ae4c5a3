#pragma once

#include <map>
#include <string>
#include <vector>

namespace predrx {

// Flat key=value configuration. Grammar: one `key = value` pair per line,
// `#` starts a comment, blank lines ignored. Values are raw strings; typed
// accessors parse on demand and throw std::runtime_error naming the key on
// a bad or missing value.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::int64_t value);

  std::string str(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  double num(const std::string& key) const;
  double num(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> num_list(const std::string& key) const;           // comma-separated
  std::vector<std::string> str_list(const std::string& key) const;

  std::string to_string() const;  // round-trips through from_string
  const std::vector<std::string>& keys() const { return order_; }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

}  // namespace predrx
