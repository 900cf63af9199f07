#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace vff {

// Flat TOML-style key = value file. Values: quoted strings, booleans,
// numbers, and [comma, separated, lists]. '#' starts a comment.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_string(const std::string& text);
  static KeyValueConfig parse_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  std::int64_t get_int(const std::string& key, std::int64_t def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<std::int64_t> get_int_list(const std::string& key,
                                         std::vector<std::int64_t> def) const;
  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> def) const;
  std::vector<std::string> get_string_list(const std::string& key,
                                           std::vector<std::string> def) const;

  void set(const std::string& key, const std::string& raw_value);
  std::vector<std::string> keys() const;

 private:
  // raw scalar tokens, or list elements for list-valued keys
  std::map<std::string, std::vector<std::string>> values_;
  std::map<std::string, bool> is_list_;
};

}  // namespace vff
