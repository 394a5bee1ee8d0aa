// Copyright 2026 The Dapper Authors
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

namespace dapper {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input or configuration: the caller can fix it by changing arguments.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Input file could not be parsed.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& message, std::size_t row, std::size_t column)
      : ValidationError(message), row_(row), column_(column) {}

  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

// A graph node with no outgoing weight; the transition matrix is undefined.
class IsolatedNodeError : public Error {
 public:
  explicit IsolatedNodeError(std::size_t node)
      : Error("isolated node " + std::to_string(node) +
              " has zero total affinity"),
        node_(node) {}

  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

}  // namespace dapper
