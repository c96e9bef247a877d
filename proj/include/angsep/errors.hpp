// Copyright 2026 The Angsep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace angsep {

// Base of every error thrown by the library. The CLI maps each subclass to a
// distinct process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration: bad parameter ranges, unknown config keys,
// non-COLA framing, infeasible room/rt60 combinations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures and malformed files (including corrupt WAV headers).
class IoError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation precondition (length mismatch, out-of-range
// offset, future-frame access from a causal processor).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Geometrically or numerically degenerate input, e.g. a zero position vector
// or an all-zero impulse response.
class DegenerateInputError : public ContractError {
 public:
  using ContractError::ContractError;
};

// Rejection sampling ran out of attempts.
class SamplingExhaustedError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace angsep
