// Copyright 2026 The tokbias Authors.
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

#ifndef TOKBIAS_ERROR_HPP_
#define TOKBIAS_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tokbias {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A character that is not part of the tokeniser's alphabet.
class UnknownSymbolError : public Error {
 public:
  UnknownSymbolError(unsigned char symbol, std::size_t offset)
      : Error("unknown symbol 0x" + hex(symbol) + " at offset " +
              std::to_string(offset)),
        symbol_(symbol),
        offset_(offset) {}

  unsigned char symbol() const { return symbol_; }
  std::size_t offset() const { return offset_; }

 private:
  static std::string hex(unsigned char c) {
    static constexpr char kDigits[] = "0123456789abcdef";
    return {kDigits[c >> 4], kDigits[c & 0xf]};
  }

  unsigned char symbol_;
  std::size_t offset_;
};

// A subword id that does not resolve in the relevant vocabulary.
class UnknownIdError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Line numbers are 1-based; 0 means "whole file".
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line,
             const std::string& what)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) +
              ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Violated precondition on a public operation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The estimation problem is not identified (e.g. rank-deficient design).
class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace tokbias

#endif  // TOKBIAS_ERROR_HPP_
