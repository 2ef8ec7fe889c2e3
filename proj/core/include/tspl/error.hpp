// core/include/tspl/error.hpp

// Copyright 2026  The tspl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef TSPL_ERROR_HPP_
#define TSPL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace tspl {

/// Broad failure category. The CLI maps each category to its exit code.
enum class ErrorKind {
  kUsage = 2,       // bad flags or configuration
  kIo = 3,          // file missing, unreadable or malformed on disk
  kValidation = 4,  // well-formed input that violates a contract
  kService = 5,     // external HTTP endpoint failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::kValidation, what) {}
};

class ServiceError : public Error {
 public:
  explicit ServiceError(const std::string& what)
      : Error(ErrorKind::kService, what) {}
};

/// Rejected credentials. Never retried.
class AuthError : public ServiceError {
 public:
  explicit AuthError(const std::string& what) : ServiceError(what) {}
};

inline int exit_code(ErrorKind kind) { return static_cast<int>(kind); }

}  // namespace tspl

#endif  // TSPL_ERROR_HPP_
