// Flat key = value experiment configuration ('#' comments, namespaced keys).
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace opsim {

class Config {
 public:
  Config() = default;

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  /// Typed getters; throw ConfigError naming the key on missing/bad values.
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;

  /// Sorted key/value view (deterministic echo order).
  const std::map<std::string, std::string>& values() const { return values_; }

  /// Reject keys outside the allowed set (catches typos).
  void require_known_keys(const std::vector<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace opsim
