#pragma once

#include <stdexcept>
#include <string>

namespace gwig {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotPsdError : Error {
    using Error::Error;
};

/// The square root of S exists but violates the entrywise positivity
/// assumption; the offending entry is reported in the message.
struct AssumptionViolatedError : Error {
    using Error::Error;
};

struct NearSingularError : Error {
    using Error::Error;
};

struct NoSolutionError : Error {
    using Error::Error;
};

struct ConvergenceFailureError : Error {
    using Error::Error;
};

struct MixedProfilesError : Error {
    using Error::Error;
};

struct UnsupportedLawError : Error {
    using Error::Error;
};

struct UnsupportedChainError : Error {
    using Error::Error;
};

struct UnsupportedFlavorsError : Error {
    using Error::Error;
};

struct InsufficientSizesError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

} // namespace gwig
