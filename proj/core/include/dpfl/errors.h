/*
 * Copyright 2026 The dpfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef DPFL_ERRORS_H_
#define DPFL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace dpfl {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied an argument outside the operation's contract.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Vector or matrix shapes that must agree do not.
class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Adaptive quadrature stopped without meeting its error tolerance.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

// On-disk formats.
class FormatError : public Error {
 public:
  using Error::Error;
};
class MalformedHeader : public FormatError {
 public:
  using FormatError::FormatError;
};
class TruncatedPayload : public FormatError {
 public:
  using FormatError::FormatError;
};
class LabelOutOfRange : public FormatError {
 public:
  using FormatError::FormatError;
};

// Configuration parsing. Each carries the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : Error(key + ": " + message), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};
class UnknownKey : public ConfigError {
 public:
  using ConfigError::ConfigError;
};
class OutOfRange : public ConfigError {
 public:
  using ConfigError::ConfigError;
};
class ConflictingOptions : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace dpfl

#endif  // DPFL_ERRORS_H_
