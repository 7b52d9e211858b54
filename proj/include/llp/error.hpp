// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace llp {

// Every failure raised by the library derives from Error and carries a short
// machine-readable kind used by the CLI for its error prefix and exit code.
class Error : public std::runtime_error {
public:
    Error(const char* kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    const char* kind() const noexcept { return kind_; }

private:
    const char* kind_;
};

// Caller broke a precondition or supplied inconsistent arguments.
class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error("usage", what) {}
};

// Malformed input file.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error("format", what) {}
};

// Exact enumeration requested beyond its guard.
class CapacityError : public Error {
public:
    explicit CapacityError(const std::string& what) : Error("capacity", what) {}
};

// Non-finite loss or gradient during training.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error("numerical", what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io", what) {}
};

} // namespace llp
