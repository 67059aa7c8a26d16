#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jsde {

/// Raised when an argument violates a documented precondition.
class InvalidInput : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A simulation produced a non-finite value.
class NumericError : public std::runtime_error {
  public:
    NumericError(const std::string& what, std::size_t step, std::size_t component = 0)
        : std::runtime_error(what + " (step " + std::to_string(step) + ", component " +
                             std::to_string(component) + ")"),
          step_(step),
          component_(component) {}

    std::size_t step() const noexcept { return step_; }
    std::size_t component() const noexcept { return component_; }

  private:
    std::size_t step_;
    std::size_t component_;
};

}  // namespace jsde
