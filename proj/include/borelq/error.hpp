#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace borelq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A violated precondition; `module()` names the module that owns it.
class PreconditionError : public Error {
 public:
  PreconditionError(std::string module, const std::string& message)
      : Error("[" + module + "] " + message), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Density dropped below the configured floor at grid index `index()`.
class DensityFloorError : public Error {
 public:
  DensityFloorError(std::size_t index, double value, double floor)
      : Error("density floor violated at grid index " + std::to_string(index) +
              " (rho = " + std::to_string(value) +
              ", floor = " + std::to_string(floor) + ")"),
        index_(index), value_(value), floor_(floor) {}

  std::size_t index() const noexcept { return index_; }
  double value() const noexcept { return value_; }
  double floor() const noexcept { return floor_; }

 private:
  std::size_t index_;
  double value_;
  double floor_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace borelq
