// Copyright 2026 The declab Authors. All Rights Reserved.
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

#ifndef DECLAB_ERRORS_HPP_
#define DECLAB_ERRORS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace declab {

// Argument outside the domain of an operation (e.g. K < 4, ring with n < 3).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A mixing matrix failed validation (stochasticity, primitivity, lambda < 1).
class InvalidMixing : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative routine failed to converge, or an iterate became non-finite.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, std::int64_t iterations)
      : std::runtime_error(what), iterations_(iterations) {}

  std::int64_t iterations() const noexcept { return iterations_; }

 private:
  std::int64_t iterations_;
};

// Malformed input file or config text. `line` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Experiment configuration that parses but does not validate. `key` names the
// offending field as "section.key".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(key) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace declab

#endif  // DECLAB_ERRORS_HPP_
