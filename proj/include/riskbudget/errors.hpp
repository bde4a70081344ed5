#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace riskbudget {

// Bad user input: malformed files, invalid parameters, dimension mismatches.
// The CLI maps these to exit code 1.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical failure on valid input. The CLI maps these to exit code 2.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivergenceError : public NumericError {
public:
    DivergenceError(std::size_t iteration, const std::string& what)
        : NumericError("divergence at iteration " + std::to_string(iteration) + ": " + what),
          iteration_(iteration) {}

    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

}  // namespace riskbudget
