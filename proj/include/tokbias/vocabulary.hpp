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

#ifndef TOKBIAS_VOCABULARY_HPP_
#define TOKBIAS_VOCABULARY_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tokbias {

using SubwordId = std::uint32_t;

enum class Objective { bpe_count, wp_pmi };
enum class TokFn { merge_based, longest_prefix };

std::string_view to_string(Objective objective);
std::string_view to_string(TokFn kind);
Objective parse_objective(std::string_view name);
TokFn parse_tok_fn(std::string_view name);

// Base characters. Symbols are bytes; ids are positions in ascending byte
// order, so the alphabet occupies ids [0, size()).
class Alphabet {
 public:
  Alphabet() { index_.fill(-1); }
  // Throws InvalidArgument on duplicates or an empty symbol list.
  explicit Alphabet(std::vector<unsigned char> symbols);

  // Every distinct byte that occurs in the corpus.
  static Alphabet observed(std::span<const std::string> corpus);
  // All 256 byte values.
  static Alphabet full_bytes();

  std::size_t size() const { return symbols_.size(); }
  const std::vector<unsigned char>& symbols() const { return symbols_; }
  bool contains(unsigned char c) const { return index_[c] >= 0; }
  std::optional<SubwordId> id_of(unsigned char c) const {
    if (index_[c] < 0) return std::nullopt;
    return static_cast<SubwordId>(index_[c]);
  }

  bool operator==(const Alphabet& other) const {
    return symbols_ == other.symbols_;
  }

 private:
  std::vector<unsigned char> symbols_;
  std::array<int, 256> index_;
};

struct Merge {
  SubwordId left = 0;
  SubwordId right = 0;
  SubwordId result = 0;
  std::size_t rank = 0;  // 1-based selection order
  double score = 0.0;    // objective value when selected

  bool operator==(const Merge&) const = default;
};

// Alphabet plus the ordered list of merges produced by sequential selection.
// The result of merge k gets id alphabet.size() + k - 1, so the vocabulary at
// cutoff K is exactly the id range [0, alphabet.size() + K).
class RankedVocabulary {
 public:
  RankedVocabulary(Alphabet alphabet, Objective objective,
                   bool pretokenise = true);

  // Appends the next-ranked merge. Both operands must already exist and
  // their concatenation must not already be a subword.
  const Merge& add_merge(SubwordId left, SubwordId right, double score);

  const Alphabet& alphabet() const { return alphabet_; }
  Objective objective() const { return objective_; }
  bool pretokenise() const { return pretokenise_; }
  // Set when training ran out of mergeable pairs before the requested size.
  bool truncated() const { return truncated_; }
  void set_truncated(bool truncated) { truncated_ = truncated; }

  std::span<const Merge> merges() const { return merges_; }
  std::size_t max_rank() const { return merges_.size(); }
  std::size_t size() const { return table_.size(); }

  // Character string of a subword id; throws UnknownIdError.
  const std::string& text(SubwordId id) const;
  std::optional<SubwordId> find(std::string_view chars) const;
  // 0 for alphabet symbols.
  std::size_t rank_of(SubwordId id) const;
  SubwordId id_for_rank(std::size_t rank) const;

  // Concatenation of the subwords' character strings.
  std::string detokenise(std::span<const SubwordId> ids) const;

 private:
  Alphabet alphabet_;
  Objective objective_;
  bool pretokenise_;
  bool truncated_ = false;
  std::vector<Merge> merges_;
  std::vector<std::string> table_;
  std::unordered_map<std::string, SubwordId> index_;
};

// Replaces every left-to-right, non-overlapping occurrence of
// (merge.left, merge.right) with merge.result in a single pass.
std::vector<SubwordId> apply_merge(std::span<const SubwordId> symbols,
                                   const Merge& merge);

// Working corpus D_k: distinct pre-tokenisation chunks with their
// multiplicities, each held as its current subword sequence.
struct CorpusState {
  struct Word {
    std::vector<SubwordId> symbols;
    std::uint64_t freq = 0;
  };
  std::vector<Word> words;  // in order of first occurrence
};

// Builds D_0 from raw documents. Throws UnknownSymbolError when a byte is
// outside the alphabet.
CorpusState make_corpus_state(std::span<const std::string> corpus,
                              const Alphabet& alphabet, bool split_chunks);

inline std::uint64_t pair_key(SubwordId left, SubwordId right) {
  return (static_cast<std::uint64_t>(left) << 32) | right;
}

// Raw adjacent-occurrence counts of pairs and occurrence counts of single
// subwords over a corpus state.
struct PairStatistics {
  std::unordered_map<std::uint64_t, std::uint64_t> pairs;
  std::unordered_map<SubwordId, std::uint64_t> units;

  std::uint64_t pair_count(SubwordId left, SubwordId right) const;
  std::uint64_t unit_count(SubwordId id) const;
};

PairStatistics count_pairs(const CorpusState& state);

// #(<left, right>, D_k).
double objective_bpe(const PairStatistics& stats, SubwordId left,
                     SubwordId right);
// #(<l,r>) / (#(<l>) #(<r>)); nullopt when the denominator is zero, which
// makes the pair ineligible rather than scoring it.
std::optional<double> objective_wp(const PairStatistics& stats,
                                   SubwordId left, SubwordId right);
std::optional<double> objective_wp(std::uint64_t pair_count,
                                   std::uint64_t left_count,
                                   std::uint64_t right_count);

enum class AlphabetMode { observed, full_bytes };

struct TrainOptions {
  Objective objective = Objective::bpe_count;
  std::size_t max_merges = 0;  // K+
  AlphabetMode alphabet_mode = AlphabetMode::observed;
  bool pretokenise = true;
};

// Greedy sequential merge selection. At each step the pair maximising the
// objective over the current corpus state is added and applied. Ties go to
// the lexicographically greatest (left string, right string). A pair whose
// concatenation is already a subword is never selected. Stops early,
// setting truncated(), when no eligible pair remains.
RankedVocabulary train_ranked_vocab(std::span<const std::string> corpus,
                                    const TrainOptions& options);

}  // namespace tokbias

#endif  // TOKBIAS_VOCABULARY_HPP_
