// Copyright (C) 2026 The reprodiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace reprodiff {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied an argument that violates a precondition (shape, range, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// A file was readable but its contents do not follow the expected format.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A computation produced a non-finite value or otherwise broke down numerically.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace reprodiff
