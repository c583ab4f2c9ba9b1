#pragma once

#include <stdexcept>
#include <string>

namespace mvrec {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed hierarchy: cycles, several roots, misplaced bottom nodes.
class StructureError : public Error {
public:
    using Error::Error;
};

/// Array dimensions disagree with the hierarchy or variable count.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Invalid scalar argument (m = 0, scenario id out of range, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Too few observations for the requested estimator or model.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Cholesky failed or the system is numerically singular.
class FactorizationError : public Error {
public:
    using Error::Error;
};

/// Base model could not be fitted (collinear design, degenerate series).
class FitError : public Error {
public:
    using Error::Error;
};

/// Input data failed validation (non-finite values, missing cells, bad files).
class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace mvrec
