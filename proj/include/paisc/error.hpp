#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace paisc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Invalid configuration or model specification.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// No feasible starting point could be found for the MCMC chains.
class SeedingError : public Error {
 public:
  using Error::Error;
};

// The requested method cannot handle this input (e.g. stratified sampling
// needs per-variable CDFs, which correlated inputs do not have).
class NotApplicableError : public Error {
 public:
  using Error::Error;
};

}  // namespace paisc
