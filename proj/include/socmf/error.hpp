#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace socmf {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data: malformed files, index/dimension violations, duplicates.
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameters or configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss that backtracking could not recover.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t iteration, const std::string& what)
      : Error(what), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace socmf
