#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace aac {

// Flat key-value configuration with dotted section names, e.g.
// "evolution.population = 20". Files are line-based; '#' starts a comment.
class ConfigMap {
 public:
  static ConfigMap parse_file(const std::string& path);
  static ConfigMap parse_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  long get_long(const std::string& key, long def) const;
  bool get_bool(const std::string& key, bool def) const;

  // Sorted "key = value" lines; the hash input and the config snapshot.
  std::string canonical() const;
  std::uint64_t hash() const;  // FNV-1a over canonical()
  std::string hash_hex() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace aac
