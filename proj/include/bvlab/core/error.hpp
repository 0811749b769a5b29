#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bvlab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operand shapes disagree with an operation's contract.
struct ShapeError : Error {
    using Error::Error;
};

// A configuration value is inconsistent (e.g. non-integral conv output).
struct ConfigError : Error {
    using Error::Error;
};

// An API precondition was violated (non-scalar backward, single-class set).
struct ContractError : Error {
    using Error::Error;
};

// Numeric input outside its mathematical domain.
struct DomainError : Error {
    using Error::Error;
};

// Matrix rank insufficient for the requested factorization.
struct RankError : Error {
    using Error::Error;
};

// Covariance failed its PSD validity check.
struct ValidityError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// File does not start with the expected magic bytes.
struct MagicError : IoError {
    using IoError::IoError;
};

// File ended before the declared payload.
struct TruncatedError : IoError {
    using IoError::IoError;
};

// Header fields are mutually inconsistent.
struct FileValidationError : IoError {
    using IoError::IoError;
};

// Training hit a non-finite loss; carries where.
struct TrainDivergedError : Error {
    TrainDivergedError(std::size_t epoch_, std::size_t batch_, const std::string& what_)
        : Error(what_), epoch(epoch_), batch(batch_) {}
    std::size_t epoch;
    std::size_t batch;
};

}  // namespace bvlab
