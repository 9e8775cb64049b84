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

#ifndef TOKBIAS_TOKENISER_HPP_
#define TOKBIAS_TOKENISER_HPP_

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tokbias/vocabulary.hpp"

namespace tokbias {

/// A ranked vocabulary truncated at cutoff K, paired with a tokenisation
/// function. The vocabulary is the alphabet plus the results of merges
/// 1..K, i.e. ids [0, vocab_size()).
///
/// Tokenisers are immutable after construction and safe to share between
/// threads.
class Tokeniser {
 public:
  /// Throws InvalidArgument when cutoff exceeds source->max_rank().
  Tokeniser(std::shared_ptr<const RankedVocabulary> source, std::size_t cutoff,
            TokFn kind);

  const RankedVocabulary& source() const { return *source_; }
  std::shared_ptr<const RankedVocabulary> source_ptr() const {
    return source_;
  }
  std::size_t cutoff() const { return cutoff_; }
  TokFn kind() const { return kind_; }
  /// |V|, excluding end-of-string.
  std::size_t vocab_size() const {
    return source_->alphabet().size() + cutoff_;
  }
  bool contains(SubwordId id) const { return id < vocab_size(); }

  /// Tokenises a full document: pre-tokenisation chunks (when the source
  /// vocabulary enables them) are tokenised independently and concatenated.
  /// Throws UnknownSymbolError, with the byte offset into `text`, for
  /// characters outside the alphabet.
  std::vector<SubwordId> tokenise(std::string_view text) const;

  /// Tokenises a single chunk with the merge-based function, ignoring
  /// pre-tokenisation.
  std::vector<SubwordId> tokenise_merge(std::string_view chars) const;
  /// Tokenises a single chunk with the longest-prefix function, ignoring
  /// pre-tokenisation.
  std::vector<SubwordId> tokenise_longest_prefix(std::string_view chars) const;

  /// Throws UnknownIdError for ids outside this tokeniser's vocabulary.
  std::string detokenise(std::span<const SubwordId> ids) const;

  const std::string& text(SubwordId id) const;

 private:
  std::vector<SubwordId> to_symbols(std::string_view chars,
                                    std::size_t base) const;
  std::vector<SubwordId> merge_chunk(std::string_view chars,
                                     std::size_t base) const;
  std::vector<SubwordId> longest_chunk(std::string_view chars,
                                       std::size_t base) const;

  struct TrieNode {
    std::vector<std::pair<unsigned char, int>> children;  // sorted by byte
    int id = -1;
  };
  int trie_child(int node, unsigned char c) const;

  std::shared_ptr<const RankedVocabulary> source_;
  std::size_t cutoff_;
  TokFn kind_;
  // pair_key(left, right) -> rank, for ranks <= cutoff.
  std::unordered_map<std::uint64_t, std::size_t> merge_rank_;
  std::vector<TrieNode> trie_;
};

/// View over the first K merges of `source`.
Tokeniser truncate(std::shared_ptr<const RankedVocabulary> source,
                   std::size_t cutoff, TokFn kind);

/// Free-function forms. Both check that the tokeniser's function kind
/// matches and throw InvalidArgument otherwise.
std::vector<SubwordId> tokenise_merge(std::string_view chars,
                                      const Tokeniser& tok);
std::vector<SubwordId> tokenise_longest_prefix(std::string_view chars,
                                               const Tokeniser& tok);

/// Tokenises many documents, sharing work between repeated chunks.
std::vector<std::vector<SubwordId>> tokenise_corpus(
    const Tokeniser& tok, std::span<const std::string> docs);

}  // namespace tokbias

#endif  // TOKBIAS_TOKENISER_HPP_
