#pragma once

#include <stdexcept>
#include <string>

namespace contrack {

// Invalid values, malformed input content, broken invariants.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem-level failures (missing file, unwritable path).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace contrack
