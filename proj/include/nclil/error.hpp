// Copyright 2026 The nclil Authors

// Licensed under the Apache License, Version 2.0 (the License);
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

// http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an AS IS BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <stdexcept>
#include <string>

namespace nclil {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (p < 1, t outside (0,1), ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operands of incompatible shape or model.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A stated hypothesis of a verifier does not hold for the supplied input.
/// `item()` names the violated hypothesis so reports can cite it.
class PreconditionError : public Error {
 public:
  PreconditionError(std::string item, const std::string& what)
      : Error(what), item_(std::move(item)) {}
  const std::string& item() const noexcept { return item_; }

 private:
  std::string item_;
};

/// Invalid run configuration (schema, guards, parameter gates).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The horizon is too short for the requested block structure.
class InsufficientHorizon : public Error {
 public:
  using Error::Error;
};

}  // namespace nclil
