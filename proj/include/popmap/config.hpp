#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace popmap {

// Flat "key = value" text file ('#' comments, blank lines ignored).
// Used for the pipeline config, worldspec files and grid sidecars.
class KeyValues {
 public:
  KeyValues() = default;
  static KeyValues load(const std::filesystem::path& path);
  static KeyValues from_text(const std::string& text, const std::string& name);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  double require_double(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  // Keys in first-set order.
  const std::vector<std::string>& keys() const { return order_; }
  const std::string& name() const { return name_; }

  void save(const std::filesystem::path& path) const;

  // FNV-1a over sorted key=value pairs, skipping keys that describe the
  // execution rather than the result (threads) so reruns with different
  // parallelism hash identically.
  std::string stable_hash() const;

 private:
  std::string name_ = "<memory>";
  std::unordered_map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

}  // namespace popmap
