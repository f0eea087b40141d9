#pragma once

#include <stdexcept>
#include <string>

namespace vid {

// Sampling cannot satisfy the incoherence constraints (video too short, empty range, ...).
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or truncated file contents (VIDT, VIDC, manifests, config files, plan lines).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mathematically degenerate input, e.g. a zero-norm vector fed to cosine similarity.
struct DegenerateInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes or out-of-range labels.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Invalid configuration values.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace vid
