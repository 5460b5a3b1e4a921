#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace inslab {

/// Flat `key = value` configuration. '#' starts a comment; blank lines are
/// ignored; duplicate keys are a ConfigError. Accessors record which keys
/// were read so callers can reject unknown keys.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, const std::string& source = "<string>");
  static KeyValueConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::optional<std::string> find(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::optional<double> find_double(const std::string& key) const;
  long get_long(const std::string& key, long fallback) const;
  /// Required unsigned key; throws ConfigError when absent.
  std::uint64_t require_u64(const std::string& key) const;
  /// Comma-separated doubles.
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  /// Keys never read through an accessor, in sorted order.
  std::vector<std::string> unused_keys() const;
  /// Sorted `key = value` lines.
  std::string echo() const;

 private:
  std::map<std::string, std::string> entries_;
  mutable std::set<std::string> touched_;
};

}  // namespace inslab
