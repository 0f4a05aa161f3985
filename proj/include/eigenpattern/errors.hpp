#pragma once

#include <stdexcept>
#include <string>

namespace eigenpattern {

// Error categories map 1:1 to CLI exit codes, see tools/eigenpattern_cli.cpp.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad shapes, ranks out of range, mismatched sizes.
struct DimensionError : Error {
    using Error::Error;
};

// Non-finite values, degenerate spectra, zero-variance features, singular
// covariances.
struct NumericalError : Error {
    using Error::Error;
};

// Invalid user-supplied configuration (flags, config files, ranges).
struct ValidationError : Error {
    using Error::Error;
};

// Problems while reading a dataset: missing files, undecodable images,
// malformed manifests, unknown labels.
struct IngestionError : Error {
    using Error::Error;
};

// Model file persistence problems: bad magic, unsupported version, truncation.
struct FormatError : Error {
    using Error::Error;
};

// Filesystem failures unrelated to content.
struct IoError : Error {
    using Error::Error;
};

}  // namespace eigenpattern
