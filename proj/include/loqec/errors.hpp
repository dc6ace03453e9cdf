#pragma once

#include <stdexcept>
#include <string>

namespace loqec {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad numeric input: non-unit vectors, out-of-range overlaps, negative rates.
struct ValidationError : Error {
    using Error::Error;
};

/// Element or wiring that does not fit the state it is applied to.
struct ConfigurationError : Error {
    using Error::Error;
};

/// A measurement whose occupancy precondition is violated by the state.
struct StructuralError : Error {
    using Error::Error;
};

struct UsageError : Error {
    using Error::Error;
};

struct FitError : Error {
    using Error::Error;
};

} // namespace loqec
