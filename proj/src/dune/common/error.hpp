// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace dune {

/// Base of every error raised by the core. The C API maps the subclasses onto
/// status codes, and the CLI maps those onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments, bad configuration values, unsupported options.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Missing files, corrupt files, gaps in a time series, grid mismatches.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite losses, singular systems the caller asked us to solve.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace dune
