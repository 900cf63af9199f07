#include "vff/config.hpp"

#include <fstream>
#include <sstream>

#include "vff/errors.hpp"

namespace vff {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool in_quote = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_quote = !in_quote;
    if (line[i] == '#' && !in_quote) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_list(const std::string& body) {
  std::vector<std::string> out;
  std::string cur;
  bool in_quote = false;
  for (char c : body) {
    if (c == '"') in_quote = !in_quote;
    if (c == ',' && !in_quote) {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key or value");
    cfg.set(key, value);
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

void KeyValueConfig::set(const std::string& key, const std::string& raw_value) {
  const std::string v = trim(raw_value);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']')
      throw ConfigError("config key '" + key + "': unterminated list");
    values_[key] = split_list(v.substr(1, v.size() - 2));
    is_list_[key] = true;
  } else {
    values_[key] = {v};
    is_list_[key] = false;
  }
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& def) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return def;
  return unquote(it->second.front());
}

double KeyValueConfig::get_double(const std::string& key, double def) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    return std::stod(it->second.front());
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not a number");
  }
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t def) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    return std::stoll(it->second.front());
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not an integer");
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool def) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return def;
  const std::string& v = it->second.front();
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("config key '" + key + "' is not a boolean");
}

std::vector<std::int64_t> KeyValueConfig::get_int_list(
    const std::string& key, std::vector<std::int64_t> def) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return def;
  std::vector<std::int64_t> out;
  for (const std::string& tok : it->second) {
    try {
      out.push_back(std::stoll(tok));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': '" + tok + "' is not an integer");
    }
  }
  return out;
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key,
                                                    std::vector<double> def) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return def;
  std::vector<double> out;
  for (const std::string& tok : it->second) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': '" + tok + "' is not a number");
    }
  }
  return out;
}

std::vector<std::string> KeyValueConfig::get_string_list(
    const std::string& key, std::vector<std::string> def) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return def;
  std::vector<std::string> out;
  for (const std::string& tok : it->second) out.push_back(unquote(tok));
  return out;
}

std::vector<std::string> KeyValueConfig::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

}  // namespace vff
