#pragma once

#include <stdexcept>
#include <string>

namespace ecmsense {

/// Bad numeric input (non-finite, non-positive where positivity is required, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A value left its documented domain (SOC outside an OCV curve's valid
/// range, schedule coverage exceeded, disjoint sweep ranges).
class RangeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Least-squares problem is rank deficient or otherwise numerically unusable.
class ConditioningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rejection or resampling budget exhausted while drawing parameters.
class SamplingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Structurally inconsistent inputs (overlapping intervals, misaligned traces).
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file contents; message carries the line number where known.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ecmsense
