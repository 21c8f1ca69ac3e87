// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace encost {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or truncated input bytes (Y4M, CSV, JSON).
class FormatError : public Error {
public:
    using Error::Error;
};

// Recognized container, unsupported variant (e.g. chroma tag).
class UnsupportedFormatError : public FormatError {
public:
    using FormatError::FormatError;
};

// A stream or list that must be nonempty was empty.
class EmptyInputError : public Error {
public:
    using Error::Error;
};

// Numeric argument outside its admissible range, or a degenerate input
// (frame too small for a kernel, nonpositive time, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Block or element index outside the grid.
class IndexError : public Error {
public:
    using Error::Error;
};

// Requested interval not covered by the available data.
class RangeError : public Error {
public:
    using Error::Error;
};

// Design matrix (or abscissa set) does not determine the parameters.
class RankDeficiencyError : public Error {
public:
    using Error::Error;
};

// Records and descriptor sets failed to join by sequence_id / geometry.
class JoinError : public Error {
public:
    using Error::Error;
};

// Inconsistent or incomplete configuration (missing descriptor, bad spec).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Too few repeated measurements for the stopping rule.
class InsufficientSamplesError : public Error {
public:
    using Error::Error;
};

}  // namespace encost
