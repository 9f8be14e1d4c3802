#pragma once

#include <stdexcept>
#include <string>

namespace shaping {

// Shape/dimension mismatch between tensors or network inputs.
struct ShapeError : std::invalid_argument {
    explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Operation called in an invalid order (e.g. backward without a forward).
struct StateError : std::logic_error {
    explicit StateError(const std::string& msg) : std::logic_error(msg) {}
};

// Input that is syntactically valid but mathematically degenerate
// (zero expected energy, empty batch, non-distribution probabilities).
struct DegenerateInputError : std::invalid_argument {
    explicit DegenerateInputError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Requested modulation order is not supported (non-square QAM etc.).
struct UnsupportedOrderError : std::invalid_argument {
    explicit UnsupportedOrderError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Run configuration failed validation; message names the offending field.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training diverged (NaN loss); carries the path of the diagnostic dump.
struct TrainingError : std::runtime_error {
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace shaping
