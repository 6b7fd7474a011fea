#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace despeckle {

/// Invalid filter, metric or kernel parameters (including size mismatches).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of an operation (e.g. negative
/// intensities under a multiplicative model).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A computation produced a non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace despeckle
