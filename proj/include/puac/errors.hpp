#pragma once
#include <stdexcept>
#include <string>

namespace puac {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A prior matrix breaks one of the structural constraints of the data
// generation process (rows out of range, forbidden nonzero entries, ...).
struct StructuralViolation : Error {
    using Error::Error;
};

// A prior that appears as a denominator in the risk rewrite is zero.
struct DegeneratePrior : Error {
    using Error::Error;
};

struct InvalidArgument : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct UnknownSourceTag : Error {
    using Error::Error;
};

struct EmptyClass : Error {
    using Error::Error;
};

struct EmptyBag : Error {
    using Error::Error;
};

struct MissingClass : Error {
    using Error::Error;
};

struct EmptySampleSet : Error {
    using Error::Error;
};

struct NonConvergence : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

} // namespace puac
