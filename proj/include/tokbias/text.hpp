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

#ifndef TOKBIAS_TEXT_HPP_
#define TOKBIAS_TEXT_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace tokbias {

inline bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

// Splits text into pre-tokenisation chunks. A chunk boundary is placed before
// every whitespace byte that follows a non-whitespace byte, so whitespace is
// glued to the front of the word that follows it:
//   "the cat  sat" -> ["the", " cat", "  sat"]
// Concatenating the chunks gives back the input. Merges never cross chunks.
std::vector<std::string_view> pretokenise(std::string_view text);

// Byte-exact printable escaping used by the TSV and CSV writers.
// Backslash, tab, newline, carriage return and non-printable bytes
// (including every byte >= 0x80) are escaped; unescape() inverts it.
std::string escape(std::string_view raw);
std::string unescape(std::string_view escaped);

// Quotes a CSV field when it contains a comma, quote or leading space.
std::string csv_field(std::string_view field);

// One document per line; a trailing '\r' is stripped. Empty lines are kept
// as empty documents when keep_empty is set.
std::vector<std::string> read_lines(const std::string& path,
                                    bool keep_empty = false);

// Writes the whole file through a temporary sibling and renames it in place.
void write_file_atomic(const std::string& path, std::string_view contents);

std::string read_file(const std::string& path);

}  // namespace tokbias

#endif  // TOKBIAS_TEXT_HPP_
