#pragma once

#include <stdexcept>

namespace vesselgen {

// Raised when a computation produces non-finite values or a model turns out
// to be numerically degenerate; distinguishes exit code 3 from data errors.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace vesselgen
