#pragma once

#include <stdexcept>
#include <string>

namespace clausevec {

// Bad user-supplied configuration (encoder settings, generator spec, CLI flags).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor shape incompatibility; the message names both shapes.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values or other numeric breakdown during encoding/training.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace clausevec
