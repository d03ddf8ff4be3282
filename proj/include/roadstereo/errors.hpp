#pragma once

#include <stdexcept>
#include <string>

namespace roadstereo {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raster sizes that are empty, too small, or mismatched.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Malformed PGM/PFM/CSV/key=value input.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Parameter outside its documented domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Model fitting failed (rank deficiency, too little data, no consensus).
class FitError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public FitError {
public:
    using FitError::FitError;
};

class NoConsensusError : public FitError {
public:
    using FitError::FitError;
};

/// Synthetic scene geometry that cannot be rendered.
class SceneError : public Error {
public:
    using Error::Error;
};

}  // namespace roadstereo
