// Copyright 2026 The GME Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GME_COMMON_ERROR_HPP_
#define GME_COMMON_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace gme {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// File missing, unreadable, or unwritable.
class IoError : public Error {
 public:
  using Error::Error;
};

// A record violates the line-delimited schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or mismatched artifacts (e.g. vocabulary hashes).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An operation was called with inputs that violate its preconditions.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Input does not fit the model context.
class LengthError : public Error {
 public:
  using Error::Error;
};

// An external backend (NLI model, LM scorer) failed or returned garbage.
class BackendError : public Error {
 public:
  using Error::Error;
};

// Training diverged or hit a non-finite loss.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace gme

#endif  // GME_COMMON_ERROR_HPP_
