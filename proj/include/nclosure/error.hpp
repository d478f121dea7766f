// Copyright 2026 The nclosure Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NCLOSURE_ERROR_HPP
#define NCLOSURE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace nclosure {

enum class ErrorKind {
  kInvalidArgument,
  kOutOfRange,
  kBlowUp,
  kConfig,
  kIo,
};

/// Base exception for every failure raised by the library. The C API maps
/// `kind()` onto its status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::kInvalidArgument, what) {}
};

class OutOfRange : public Error {
 public:
  explicit OutOfRange(const std::string& what)
      : Error(ErrorKind::kOutOfRange, what) {}
};

/// A nonfinite value appeared in an integrated field.
class BlowUp : public Error {
 public:
  BlowUp(double t, const std::string& what)
      : Error(ErrorKind::kBlowUp, what), time_(t) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kConfig, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

}  // namespace nclosure

#endif  // NCLOSURE_ERROR_HPP
