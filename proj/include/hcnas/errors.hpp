// Copyright 2026 The hcnas Authors.
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hcnas {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor extents disagree with what an operation requires.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An output spatial extent would drop below one.
class DegenerateShapeError : public Error {
 public:
  using Error::Error;
};

/// Add/Concat inputs cannot be combined.
class MergeError : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied value is out of its documented range.
class InputError : public Error {
 public:
  using Error::Error;
};

/// An API was called in the wrong order (e.g. backward before forward).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Internal graph invariant broken. Unreachable through the public mutators.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// A new edge would go against the current topological order.
class TopologicalOrderError : public Error {
 public:
  using Error::Error;
};

/// A morphism was asked to act on a site that is not valid for it.
class MorphRejected : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized bytes or data file. `offset` is the byte position
/// at which decoding stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class FormatError : public ParseError {
 public:
  using ParseError::ParseError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hcnas
