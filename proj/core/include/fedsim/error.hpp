// Copyright 2026 The fedsim Authors
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

#include <stdexcept>
#include <string>

namespace fedsim {

// Base of every error raised by the library. Callers that only care about
// "did it fail" catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched extents or malformed shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Class label outside [0, C).
class LabelError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or an impossible numeric request.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid argument that is not a shape or label problem.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Partition constraints that could not be met within the retry budget.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// A class present on one side of a conditional coupling but not the other.
class MissingClassError : public Error {
 public:
  MissingClassError(int label, const std::string& which)
      : Error("class " + std::to_string(label) + " is missing from " + which),
        label_(label) {}
  int label() const noexcept { return label_; }

 private:
  int label_;
};

// Configuration rejected during validation. `path()` is the dotted field path.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace fedsim
