#include "popmap/config.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "popmap/errors.hpp"
#include "popmap/textio.hpp"

namespace popmap {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

KeyValues KeyValues::load(const std::filesystem::path& path) {
  return from_text(read_text_file(path), path.string());
}

KeyValues KeyValues::from_text(const std::string& text, const std::string& name) {
  KeyValues kv;
  kv.name_ = name;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(chomp(line));
    if (sv.empty() || sv.front() == '#') continue;
    const std::size_t eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(name + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + std::string(sv) + "'");
    const std::string key{trim(sv.substr(0, eq))};
    const std::string val{trim(sv.substr(eq + 1))};
    if (key.empty())
      throw ConfigError(name + ":" + std::to_string(lineno) + ": empty key");
    kv.set(key, val);
  }
  return kv;
}

void KeyValues::set(const std::string& key, std::string value) {
  if (values_.emplace(key, value).second)
    order_.push_back(key);
  else
    values_[key] = std::move(value);
}

std::string KeyValues::get_string(const std::string& key,
                                  const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string KeyValues::require_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError(name_ + ": missing required key '" + key + "'");
  return it->second;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  double v = 0.0;
  if (!parse_double(it->second, v))
    throw ConfigError(name_ + ": key '" + key + "' is not a number: '" +
                      it->second + "'");
  return v;
}

double KeyValues::require_double(const std::string& key) const {
  if (!has(key)) throw ConfigError(name_ + ": missing required key '" + key + "'");
  return get_double(key, 0.0);
}

long long KeyValues::get_int(const std::string& key, long long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  long long v = 0;
  if (!parse_i64(it->second, v))
    throw ConfigError(name_ + ": key '" + key + "' is not an integer: '" +
                      it->second + "'");
  return v;
}

std::uint64_t KeyValues::get_u64(const std::string& key,
                                 std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v = 0;
  auto res = std::from_chars(it->second.data(),
                             it->second.data() + it->second.size(), v);
  if (res.ec != std::errc{} || res.ptr != it->second.data() + it->second.size())
    throw ConfigError(name_ + ": key '" + key + "' is not an unsigned integer");
  return v;
}

void KeyValues::save(const std::filesystem::path& path) const {
  std::ostringstream out;
  for (const std::string& key : order_)
    out << key << " = " << values_.at(key) << "\n";
  write_text_file(path, out.str());
}

std::string KeyValues::stable_hash() const {
  std::vector<std::string> sorted = order_;
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::string_view s) {
    for (const char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
  };
  for (const std::string& key : sorted) {
    if (key == "threads") continue;
    mix(key);
    mix("=");
    mix(values_.at(key));
    mix("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace popmap
