#pragma once

#include <stdexcept>
#include <string>

namespace revlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter violates its documented range (grid size, risk aversion, ...).
class InvalidConfig : public Error {
public:
    using Error::Error;
};

/// Inputs are individually valid but inconsistent (length mismatch, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Market clearing has no root on (0,1).
class NoEquilibrium : public Error {
public:
    using Error::Error;
};

/// Weighted regression with zero variance in one of the variables.
class DegenerateRegression : public Error {
public:
    using Error::Error;
};

/// A fixed-point map application lost too many lattice cells to clearing failures.
class AbortedIteration : public Error {
public:
    using Error::Error;
};

}  // namespace revlab
