// Copyright 2026 The semfuse authors
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

namespace semfuse {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or inconsistent user configuration (missing files, contradictory options).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A file exists but does not parse as the expected format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage failed; carries the stage name for diagnostics.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& message)
      : Error(stage + ": " + message), stage_(stage) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

class EmptyTrack : public Error {
 public:
  using Error::Error;
};

class TimestampOutOfRange : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidFraction : public Error {
 public:
  using Error::Error;
};

class EmptyImage : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class BehindCamera : public Error {
 public:
  using Error::Error;
};

class MissingCamera : public Error {
 public:
  using Error::Error;
};

class IncompleteSpec : public Error {
 public:
  using Error::Error;
};

class UnknownClassInTruth : public Error {
 public:
  using Error::Error;
};

class NoHits : public Error {
 public:
  using Error::Error;
};

}  // namespace semfuse
