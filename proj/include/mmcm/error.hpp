/* Copyright 2026 The MMCM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mmcm {

// Base of every error raised by the library. The CLI maps subclasses to exit
// codes: ConfigError -> 1, InvalidArgument/FormatError -> 2,
// DegenerateError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on shapes, counts or values was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A configuration key or value failed validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The fitted pipeline or a sample cannot be evaluated (no modes, no valid
// modes, every prediction removed, ...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// A serialized file could not be decoded.
class FormatError : public Error {
 public:
  enum class Kind { kIo, kMagic, kVersion, kTruncated, kSkeleton, kContent };

  FormatError(Kind kind, std::uint64_t offset, const std::string& what)
      : Error(what + " (byte offset " + std::to_string(offset) + ")"),
        kind_(kind),
        offset_(offset) {}

  Kind kind() const { return kind_; }
  std::uint64_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::uint64_t offset_;
};

}  // namespace mmcm
