#pragma once

#include <stdexcept>
#include <string>

namespace emokw {

/// Input data that violates a documented format or precondition.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public DataError {
public:
    using DataError::DataError;
};

/// On-disk artifact with an unsupported version, bad checksum or bad digest.
class FormatError : public DataError {
public:
    using DataError::DataError;
};

/// A solver produced NaN or infinity.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace emokw
