#pragma once

#include <stdexcept>

namespace pixmatch {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape or channel-count disagreement between tensors.
struct DimensionError : Error {
    using Error::Error;
};

// Flat or 2-D index outside the addressable grid.
struct IndexError : Error {
    using Error::Error;
};

// Invalid value for a hyper-parameter or tensor element.
struct ParameterError : Error {
    using Error::Error;
};

// Malformed tensor file: wrong magic or corrupt header.
struct FormatError : Error {
    using Error::Error;
};

// Tensor file rank outside the supported set {2, 3}.
struct UnsupportedRankError : FormatError {
    using FormatError::FormatError;
};

// Tensor file shorter or longer than the header promises.
struct LengthError : Error {
    using Error::Error;
};

// Rejection sampling could not produce a valid scene.
struct GenerationError : Error {
    using Error::Error;
};

// Filesystem-level read or write failure.
struct IoError : Error {
    using Error::Error;
};

}  // namespace pixmatch
