/*
 * Copyright 2026 The fedsln Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSLN_ERROR_HPP_
#define FEDSLN_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedsln {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed textual input. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Input violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Parameter structures of incompatible shape were combined.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A statistic is undefined on the given input (e.g. AUC on one class).
class UndefinedStatistic : public Error {
 public:
  using Error::Error;
};

}  // namespace fedsln

#endif  // FEDSLN_ERROR_HPP_
