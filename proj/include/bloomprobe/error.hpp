// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bloomprobe {

/// Base class of every error thrown by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad run configuration or command-line input.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data that cannot be used (malformed files, bad labels, misaligned ids).
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::size_t line);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public DataError {
public:
    using DataError::DataError;
};

/// Binary file whose contents do not match the ACTV1 layout.
class FormatError : public DataError {
public:
    FormatError(const std::string& what, std::uint64_t offset);
    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

class UnsupportedVersionError : public FormatError {
public:
    UnsupportedVersionError(std::uint32_t version, std::uint64_t offset);
    std::uint32_t version() const noexcept { return version_; }

private:
    std::uint32_t version_;
};

/// Sample ids of two inputs that should line up do not.
class AlignmentError : public DataError {
public:
    using DataError::DataError;
};

/// Training diverged (non-finite objective).
class NumericalError : public DataError {
public:
    using DataError::DataError;
};

class BoundsError : public Error {
public:
    using Error::Error;
};

/// Caller passed arguments of inconsistent shape or out-of-contract values.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace bloomprobe
