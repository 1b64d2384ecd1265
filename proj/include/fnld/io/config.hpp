#pragma once

// Flat key=value configuration files. Lines are `key = value`, blank lines
// and '#' comments are skipped. Typed getters name the offending key on any
// problem, and a final check rejects keys the consumer never asked about, so
// a typo in a config file fails loudly instead of silently using a default.

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "csv.hpp"

namespace fnld::io {

class Config {
 public:
  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("Config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str(), path);
  }

  static Config from_string(const std::string& text, const std::string& origin = "<string>") {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const std::size_t eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                    ": expected key = value, got '" + trimmed + "'");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty())
        throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": empty key");
      if (cfg.values_.count(key))
        throw std::invalid_argument(origin + ": duplicate key '" + key + "'");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  double get_double(const std::string& key) const {
    touch(key);
    try {
      return parse_double(raw(key));
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument(origin_ + ": key '" + key + "' is not a number: '" +
                                  raw(key) + "'");
    }
  }
  double get_double(const std::string& key, double fallback) const {
    touch(key);
    return values_.count(key) ? get_double(key) : fallback;
  }

  int get_int(const std::string& key) const {
    touch(key);
    const std::string& v = raw(key);
    std::size_t used = 0;
    int out = 0;
    try {
      out = std::stoi(v, &used);
    } catch (...) {
      used = std::string::npos;
    }
    if (used != v.size())
      throw std::invalid_argument(origin_ + ": key '" + key + "' is not an integer: '" + v + "'");
    return out;
  }
  int get_int(const std::string& key, int fallback) const {
    touch(key);
    return values_.count(key) ? get_int(key) : fallback;
  }

  std::string get_string(const std::string& key) const {
    touch(key);
    return raw(key);
  }
  std::string get_string(const std::string& key, const std::string& fallback) const {
    touch(key);
    return values_.count(key) ? raw(key) : fallback;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    touch(key);
    if (!values_.count(key)) return fallback;
    const std::string& v = raw(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument(origin_ + ": key '" + key + "' is not a boolean: '" + v + "'");
  }

  // call after all getters: any key never requested is a config error
  void reject_unknown_keys() const {
    for (const auto& [key, value] : values_)
      if (!requested_.count(key))
        throw std::invalid_argument(origin_ + ": unknown key '" + key + "'");
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  const std::string& raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
      throw std::invalid_argument(origin_ + ": missing required key '" + key + "'");
    return it->second;
  }

  void touch(const std::string& key) const { requested_.insert(key); }

  std::string origin_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> requested_;
};

}  // namespace fnld::io
