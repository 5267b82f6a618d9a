// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace tsep {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand extents do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameters (odd kernel expected, heads not dividing width, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition of an operation.
class ContractError : public Error {
 public:
  using Error::Error;
};

class InputTooShortError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced by an operation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed file (WAV, checkpoint, config).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace tsep
