// Copyright 2026 The regretmeter Authors.
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace regretmeter {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Query on a context whose last token is eos.
class TerminalContextError : public Error {
 public:
  using Error::Error;
};

// A loss that would be +inf was aggregated without a probability floor.
class InfiniteLossError : public Error {
 public:
  InfiniteLossError(const std::string& what, std::size_t unit, std::size_t step)
      : Error(what), unit_(unit), step_(step) {}

  std::size_t unit() const { return unit_; }
  std::size_t step() const { return step_; }

 private:
  std::size_t unit_;
  std::size_t step_;
};

// Malformed file or string input. Line and column are 1-based; 0 means n/a.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0,
             std::size_t column = 0)
      : Error(Format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string Format(const std::string& what, std::size_t line,
                            std::size_t column) {
    if (line == 0) return what;
    std::string out = "line " + std::to_string(line);
    if (column != 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

// Exact enumeration would exceed its configured budget.
class BudgetExceededError : public Error {
 public:
  using Error::Error;
};

// Transport, protocol or payload failure talking to a bridge server.
class BridgeError : public Error {
 public:
  using Error::Error;
};

}  // namespace regretmeter
