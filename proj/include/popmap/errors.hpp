#pragma once

#include <stdexcept>
#include <string>

namespace popmap {

// Parse failures carry the file and 1-based line they occurred on.
struct ParseError : std::runtime_error {
  ParseError(const std::string& path, int line, const std::string& msg)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + msg) {}
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Semantic failures of otherwise well-formed inputs (grid mismatches,
// missing census units, non-nested hierarchies, empty cluster sets).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace popmap
