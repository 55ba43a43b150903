#pragma once

#include <stdexcept>
#include <string>

namespace liir {

// Error taxonomy shared across the library. Each failure class maps to a
// distinct exception so callers (and the CLI exit-code policy) can tell
// configuration mistakes from data problems from numeric blow-ups.

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/operand shapes do not conform to an operation's shape rule.
struct ShapeError : Error {
    using Error::Error;
};

// Non-finite values encountered where finite math is required.
struct NumericError : Error {
    using Error::Error;
};

// An API contract was violated (e.g. backward from a non-scalar).
struct ContractError : Error {
    using Error::Error;
};

// Invalid configuration value or unknown configuration key.
struct ConfigError : Error {
    using Error::Error;
};

// Argument outside its documented range.
struct RangeError : Error {
    using Error::Error;
};

// Operation issued in a state that cannot serve it (e.g. empty bank).
struct StateError : Error {
    using Error::Error;
};

// Filesystem-level failure: missing file, unreadable directory.
struct IoError : Error {
    using Error::Error;
};

// File exists but its contents are malformed.
struct FormatError : Error {
    using Error::Error;
};

// Input too degenerate for the requested estimation (e.g. fewer nonzero
// heatmap entries than mixture components).
struct DegenerateInput : Error {
    using Error::Error;
};

}  // namespace liir
