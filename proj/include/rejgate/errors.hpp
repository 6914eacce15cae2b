#pragma once

#include <stdexcept>
#include <string>

namespace rejgate {

// Error taxonomy mirrored by the CLI exit codes:
//   UsageError      -> 1  (bad flags or argument values)
//   ValidationError -> 2  (malformed data or config)
//   DegenerateError -> 3  (computation undefined on this input, e.g. empty mean)

struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateError : std::runtime_error {
  explicit DegenerateError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rejgate
