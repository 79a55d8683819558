#pragma once

#include <stdexcept>
#include <string>

namespace aware {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed formula text.
struct ParseError : Error {
    using Error::Error;
};

// Malformed or inconsistent input data (JSON schemas, CLI arguments,
// references to undeclared names).
struct InputError : Error {
    using Error::Error;
};

// A semantic precondition was violated during evaluation or construction
// (e.g. a quantified variable crossing a model-changing operator).
struct EvalError : Error {
    using Error::Error;
};

} // namespace aware
