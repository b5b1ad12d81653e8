#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wge {

// Base for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes that do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed or unsupported input data (files, manifests, signals).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Adversarial training diverged. Carries where it happened.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, std::size_t epoch, std::size_t step)
      : Error(what + " (epoch " + std::to_string(epoch) + ", step " +
              std::to_string(step) + ")"),
        epoch_(epoch),
        step_(step) {}

  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t epoch_;
  std::size_t step_;
};

}  // namespace wge
