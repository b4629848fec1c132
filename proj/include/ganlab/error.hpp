#pragma once

#include <stdexcept>
#include <string>

namespace ganlab {

// Base of every error the engine raises. Operations that throw leave their
// inputs unchanged.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration: bad layer chain, out-of-range hyperparameter, too few
// drawn points.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Tensor width/shape mismatch.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Precondition violated by the caller (stale cache, empty batch, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

// Non-finite loss, gradient or generator output.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Malformed wire message.
class DecodeError : public Error {
public:
    using Error::Error;
};

// Command not allowed in the current session mode.
class TransitionError : public Error {
public:
    using Error::Error;
};

} // namespace ganlab
