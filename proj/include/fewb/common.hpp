#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fewb {

#ifdef FEWB_SINGLE_PRECISION
using real = float;
#else
using real = double;
#endif

/// Shape or dimension disagreement between operands.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite value detected where the computation requires finite inputs.
/// Carries the id of the first offending tape node when known (-1 otherwise).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg, int node = -1)
        : std::runtime_error(msg), node_id(node) {}
    int node_id;
};

/// API misuse: violated precondition that is not a shape problem.
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid or inconsistent run configuration.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem/serialization failure.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Checkpoint file rejected (bad magic, truncated, wrong version).
struct CheckpointError : std::runtime_error {
    explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fewb
