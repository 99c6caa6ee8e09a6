#pragma once

#include <stdexcept>
#include <string>

namespace xdr {

// Error taxonomy. The CLI maps each family to a fixed exit code:
// ValidationError and IoError -> 2, CorruptArtifact -> 3, BackendError -> 4.

class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

class LookupError : public std::out_of_range {
 public:
  explicit LookupError(const std::string& what) : std::out_of_range(what) {}
};

class RangeError : public std::out_of_range {
 public:
  explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

class CorruptArtifact : public std::runtime_error {
 public:
  explicit CorruptArtifact(const std::string& what) : std::runtime_error(what) {}
};

class BackendError : public std::runtime_error {
 public:
  explicit BackendError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace xdr
