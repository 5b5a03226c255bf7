/*
 * Copyright (c) 2026, The Mixing Levels Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace mixlevels {

/// Input value outside the domain an operation accepts (non-finite angle,
/// empty buffer, malformed trajectory).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid parameters: envelope, gate, sample rate, tempo, config file.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rendering requested before a stem bank was loaded.
class NotReady : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Accelerometer sample outside the accepted magnitude band (shake or
/// freefall). Callers keep their previous tilt.
class SampleRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse failure with the 1-based line it happened on.
class ParseError : public DomainError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DomainError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace mixlevels
