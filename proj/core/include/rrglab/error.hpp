#pragma once

#include <stdexcept>
#include <string>

namespace rrglab {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid (N, d), step sizes, sample counts and similar caller mistakes.
class ParameterError : public Error {
public:
    using Error::Error;
};

class SamplingError : public Error {
public:
    using Error::Error;
};

// Enumeration or dense-evaluation budget exceeded.
class SizeError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

// Eigenvalue gap collapsed below the configured threshold.
class SingularityError : public NumericError {
public:
    using NumericError::NumericError;
};

// The trivial direction e could not be separated from the spectrum.
class DeflationError : public NumericError {
public:
    using NumericError::NumericError;
};

class InvariantError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace rrglab
