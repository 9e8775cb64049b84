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

#ifndef TOKBIAS_IO_HPP_
#define TOKBIAS_IO_HPP_

#include <string>
#include <vector>

#include "tokbias/tokeniser.hpp"
#include "tokbias/vocabulary.hpp"

namespace tokbias {

inline constexpr int kVocabularyFormatVersion = 1;

// Ranked-vocabulary file. Layout:
//   {"version": 1, "objective_kind": "bpe_count", "pretokenise": true,
//    "truncated": false, "alphabet": [32, 97, ...],
//    "merges": [{"rank": 1, "left": 3, "right": 7, "result": 40,
//                "score": 2.0, "text": "aa"}, ...]}
// Alphabet entries are byte values; left/right/result are subword ids.
// "text" is informational (non-UTF-8 bytes are replaced) and ignored on
// load. Serialising a loaded file reproduces it byte for byte.
std::string vocabulary_to_json(const RankedVocabulary& vocab);
RankedVocabulary vocabulary_from_json(const std::string& json,
                                      const std::string& source = "<memory>");

void save_vocabulary(const RankedVocabulary& vocab, const std::string& path);
RankedVocabulary load_vocabulary(const std::string& path);

// Token-stream file: one document per line, space-separated decimal ids.
std::string token_stream_to_text(
    const std::vector<std::vector<SubwordId>>& docs);
std::vector<std::vector<SubwordId>> token_stream_from_text(
    const std::string& text, const std::string& source = "<memory>");

// Sidecar map for a token stream: "id<TAB>escaped-string" per line, covering
// the tokeniser's whole vocabulary.
std::string token_map_to_text(const Tokeniser& tok);

}  // namespace tokbias

#endif  // TOKBIAS_IO_HPP_
