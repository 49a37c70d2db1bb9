#pragma once

#include <stdexcept>
#include <string>

namespace qarrival {

// exp(-z^2) (or a propagated quantity) left the representable range.
struct OverflowError : std::range_error {
    explicit OverflowError(const std::string& what) : std::range_error(what) {}
};

// An adaptive quadrature or node-doubling loop stalled before reaching
// its tolerance.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Parameter or file-content violation of a documented invariant.
struct ValidationError : std::invalid_argument {
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace qarrival
