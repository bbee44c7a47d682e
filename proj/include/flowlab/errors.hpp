#pragma once

#include <stdexcept>
#include <string>

namespace flowlab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument: a metric, triple, time or parameter outside its domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A printed closed form was requested outside the branch it was derived for.
class UnsupportedBranch : public Error {
public:
    using Error::Error;
};

/// Hypothesis of a rate formula not met (e.g. |C2| vanishes on the probed window).
class HypothesisViolated : public Error {
public:
    using Error::Error;
};

/// Numerical procedure failed (step underflow, insufficient margin, no convergence).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// An internal invariant was breached; indicates a bug or an integration fault.
class InvariantBreach : public Error {
public:
    using Error::Error;
};

}  // namespace flowlab
