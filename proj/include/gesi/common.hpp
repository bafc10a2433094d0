// Copyright 2026 The Gesikit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GESI_COMMON_HPP_
#define GESI_COMMON_HPP_

#include <cmath>
#include <stdexcept>
#include <string>

namespace gesi {

// Base class for all errors thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable file or a WAV encoding outside the supported PCM subset.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg) : Error(msg) {}
};

// Level measurement requested on an all-zero signal.
class SilentSignalError : public Error {
 public:
  explicit SilentSignalError(const std::string& msg) : Error(msg) {}
};

class SampleRateMismatchError : public Error {
 public:
  explicit SampleRateMismatchError(const std::string& msg) : Error(msg) {}
};

class DurationMismatchError : public Error {
 public:
  explicit DurationMismatchError(const std::string& msg) : Error(msg) {}
};

// Similarity against an all-zero reference band.
class DegenerateReferenceError : public Error {
 public:
  explicit DegenerateReferenceError(const std::string& msg) : Error(msg) {}
};

// F0 estimation on material with no voiced frames.
class UnvoicedInputError : public Error {
 public:
  explicit UnvoicedInputError(const std::string& msg) : Error(msg) {}
};

// Psychometric function never reaches the 50% point.
class NoSrtError : public Error {
 public:
  explicit NoSrtError(const std::string& msg) : Error(msg) {}
};

// Pearson correlation of a constant sequence.
class UndefinedCorrelationError : public Error {
 public:
  explicit UndefinedCorrelationError(const std::string& msg) : Error(msg) {}
};

// Sigmoid fit on a degenerate design (all abscissae identical).
class UnidentifiableFitError : public Error {
 public:
  explicit UnidentifiableFitError(const std::string& msg) : Error(msg) {}
};

// Bad run configuration or CSV schema violation.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline double db_to_linear(double db) { return std::pow(10.0, db / 20.0); }
inline double linear_to_db(double lin) { return 20.0 * std::log10(lin); }

}  // namespace gesi

#endif  // GESI_COMMON_HPP_
