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

#include "tokbias/vocabulary.hpp"

#include <algorithm>
#include <queue>
#include <tuple>
#include <unordered_set>

#include "tokbias/error.hpp"
#include "tokbias/text.hpp"

namespace tokbias {

std::string_view to_string(Objective objective) {
  return objective == Objective::bpe_count ? "bpe_count" : "wp_pmi";
}

std::string_view to_string(TokFn kind) {
  return kind == TokFn::merge_based ? "merge_based" : "longest_prefix";
}

Objective parse_objective(std::string_view name) {
  if (name == "bpe_count" || name == "bpe") return Objective::bpe_count;
  if (name == "wp_pmi" || name == "wp") return Objective::wp_pmi;
  throw InvalidArgument("unknown objective '" + std::string(name) + "'");
}

TokFn parse_tok_fn(std::string_view name) {
  if (name == "merge_based" || name == "merge") return TokFn::merge_based;
  if (name == "longest_prefix" || name == "longest") {
    return TokFn::longest_prefix;
  }
  throw InvalidArgument("unknown tokenisation function '" + std::string(name) +
                        "'");
}

// --- Alphabet ---------------------------------------------------------------

Alphabet::Alphabet(std::vector<unsigned char> symbols)
    : symbols_(std::move(symbols)) {
  index_.fill(-1);
  if (symbols_.empty()) throw InvalidArgument("alphabet must not be empty");
  std::sort(symbols_.begin(), symbols_.end());
  if (std::adjacent_find(symbols_.begin(), symbols_.end()) != symbols_.end()) {
    throw InvalidArgument("alphabet contains duplicate symbols");
  }
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    index_[symbols_[i]] = static_cast<int>(i);
  }
}

Alphabet Alphabet::observed(std::span<const std::string> corpus) {
  std::array<bool, 256> seen{};
  for (const auto& doc : corpus) {
    for (char c : doc) seen[static_cast<unsigned char>(c)] = true;
  }
  std::vector<unsigned char> symbols;
  for (int c = 0; c < 256; ++c) {
    if (seen[c]) symbols.push_back(static_cast<unsigned char>(c));
  }
  return Alphabet(std::move(symbols));
}

Alphabet Alphabet::full_bytes() {
  std::vector<unsigned char> symbols(256);
  for (int c = 0; c < 256; ++c) symbols[c] = static_cast<unsigned char>(c);
  return Alphabet(std::move(symbols));
}

// --- RankedVocabulary -------------------------------------------------------

RankedVocabulary::RankedVocabulary(Alphabet alphabet, Objective objective,
                                   bool pretokenise)
    : alphabet_(std::move(alphabet)),
      objective_(objective),
      pretokenise_(pretokenise) {
  for (unsigned char c : alphabet_.symbols()) {
    std::string s(1, static_cast<char>(c));
    index_.emplace(s, static_cast<SubwordId>(table_.size()));
    table_.push_back(std::move(s));
  }
}

const Merge& RankedVocabulary::add_merge(SubwordId left, SubwordId right,
                                         double score) {
  if (left >= table_.size() || right >= table_.size()) {
    throw UnknownIdError("merge operand does not name an existing subword");
  }
  std::string joined = table_[left] + table_[right];
  if (index_.contains(joined)) {
    throw InvalidArgument("merge result '" + escape(joined) +
                          "' is already a subword");
  }
  const auto result = static_cast<SubwordId>(table_.size());
  index_.emplace(joined, result);
  table_.push_back(std::move(joined));
  merges_.push_back(Merge{left, right, result, merges_.size() + 1, score});
  return merges_.back();
}

const std::string& RankedVocabulary::text(SubwordId id) const {
  if (id >= table_.size()) {
    throw UnknownIdError("unknown subword id " + std::to_string(id));
  }
  return table_[id];
}

std::optional<SubwordId> RankedVocabulary::find(std::string_view chars) const {
  auto it = index_.find(std::string(chars));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t RankedVocabulary::rank_of(SubwordId id) const {
  if (id >= table_.size()) {
    throw UnknownIdError("unknown subword id " + std::to_string(id));
  }
  return id < alphabet_.size() ? 0 : id - alphabet_.size() + 1;
}

SubwordId RankedVocabulary::id_for_rank(std::size_t rank) const {
  if (rank == 0 || rank > merges_.size()) {
    throw InvalidArgument("rank " + std::to_string(rank) + " out of range");
  }
  return static_cast<SubwordId>(alphabet_.size() + rank - 1);
}

std::string RankedVocabulary::detokenise(std::span<const SubwordId> ids) const {
  std::string out;
  for (SubwordId id : ids) out += text(id);
  return out;
}

// --- Merging and counting ---------------------------------------------------

std::vector<SubwordId> apply_merge(std::span<const SubwordId> symbols,
                                   const Merge& merge) {
  std::vector<SubwordId> out;
  out.reserve(symbols.size());
  std::size_t i = 0;
  while (i < symbols.size()) {
    if (i + 1 < symbols.size() && symbols[i] == merge.left &&
        symbols[i + 1] == merge.right) {
      out.push_back(merge.result);
      i += 2;
    } else {
      out.push_back(symbols[i]);
      ++i;
    }
  }
  return out;
}

CorpusState make_corpus_state(std::span<const std::string> corpus,
                              const Alphabet& alphabet, bool split_chunks) {
  CorpusState state;
  std::unordered_map<std::string_view, std::size_t> seen;
  auto add_chunk = [&](std::string_view chunk, std::size_t base) {
    if (chunk.empty()) return;
    auto [it, inserted] = seen.emplace(chunk, state.words.size());
    if (!inserted) {
      ++state.words[it->second].freq;
      return;
    }
    CorpusState::Word word;
    word.freq = 1;
    word.symbols.reserve(chunk.size());
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const auto c = static_cast<unsigned char>(chunk[i]);
      auto id = alphabet.id_of(c);
      if (!id) throw UnknownSymbolError(c, base + i);
      word.symbols.push_back(*id);
    }
    state.words.push_back(std::move(word));
  };
  for (const auto& doc : corpus) {
    if (!split_chunks) {
      add_chunk(doc, 0);
      continue;
    }
    std::size_t offset = 0;
    for (auto chunk : pretokenise(doc)) {
      add_chunk(chunk, offset);
      offset += chunk.size();
    }
  }
  return state;
}

std::uint64_t PairStatistics::pair_count(SubwordId left,
                                         SubwordId right) const {
  auto it = pairs.find(pair_key(left, right));
  return it == pairs.end() ? 0 : it->second;
}

std::uint64_t PairStatistics::unit_count(SubwordId id) const {
  auto it = units.find(id);
  return it == units.end() ? 0 : it->second;
}

PairStatistics count_pairs(const CorpusState& state) {
  PairStatistics stats;
  for (const auto& word : state.words) {
    for (std::size_t i = 0; i < word.symbols.size(); ++i) {
      stats.units[word.symbols[i]] += word.freq;
      if (i + 1 < word.symbols.size()) {
        stats.pairs[pair_key(word.symbols[i], word.symbols[i + 1])] +=
            word.freq;
      }
    }
  }
  return stats;
}

double objective_bpe(const PairStatistics& stats, SubwordId left,
                     SubwordId right) {
  return static_cast<double>(stats.pair_count(left, right));
}

std::optional<double> objective_wp(std::uint64_t pair_count,
                                   std::uint64_t left_count,
                                   std::uint64_t right_count) {
  if (left_count == 0 || right_count == 0) return std::nullopt;
  // The product stays far below 2^53 for any corpus we can hold in memory,
  // so both operands convert exactly and equal ratios compare equal.
  return static_cast<double>(pair_count) /
         static_cast<double>(left_count * right_count);
}

std::optional<double> objective_wp(const PairStatistics& stats,
                                   SubwordId left, SubwordId right) {
  return objective_wp(stats.pair_count(left, right), stats.unit_count(left),
                      stats.unit_count(right));
}

// --- Training ---------------------------------------------------------------

namespace {

// Incremental trainer state. Pair and unit counts are updated only for the
// words touched by a merge; the result matches a full recount after every
// step (differential-tested).
class Trainer {
 public:
  Trainer(CorpusState state, RankedVocabulary& vocab)
      : state_(std::move(state)), vocab_(vocab) {
    units_.resize(vocab_.size(), 0);
    for (std::uint32_t w = 0; w < state_.words.size(); ++w) add_word(w);
    stamp_.assign(state_.words.size(), 0);
  }

  void run(std::size_t max_merges) {
    const bool bpe = vocab_.objective() == Objective::bpe_count;
    if (bpe) {
      for (const auto& [key, count] : pairs_) heap_.push({count, key});
    }
    while (vocab_.max_rank() < max_merges) {
      auto best = bpe ? pick_bpe() : pick_wp();
      if (!best) {
        vocab_.set_truncated(true);
        return;
      }
      const auto left = static_cast<SubwordId>(best->key >> 32);
      const auto right = static_cast<SubwordId>(best->key & 0xffffffffu);
      const Merge merge = vocab_.add_merge(left, right, best->score);
      units_.push_back(0);
      apply(merge);
    }
  }

 private:
  struct Candidate {
    std::uint64_t key;
    double score;
  };
  struct HeapEntry {
    std::uint64_t count;
    std::uint64_t key;
  };

  // True when (left, right) of a beats b in the lexicographic tie-break.
  bool tie_wins(std::uint64_t a, std::uint64_t b) const {
    const auto& al = vocab_.text(static_cast<SubwordId>(a >> 32));
    const auto& ar = vocab_.text(static_cast<SubwordId>(a & 0xffffffffu));
    const auto& bl = vocab_.text(static_cast<SubwordId>(b >> 32));
    const auto& br = vocab_.text(static_cast<SubwordId>(b & 0xffffffffu));
    return std::tie(al, ar) > std::tie(bl, br);
  }

  std::optional<Candidate> pick_bpe() {
    while (!heap_.empty()) {
      const HeapEntry top = heap_.top();
      heap_.pop();
      auto it = pairs_.find(top.key);
      if (it == pairs_.end() || it->second != top.count) continue;
      if (forms_existing(top.key)) continue;
      return Candidate{top.key, static_cast<double>(top.count)};
    }
    return std::nullopt;
  }

  std::optional<Candidate> pick_wp() {
    for (;;) {
      std::optional<Candidate> best;
      for (const auto& [key, count] : pairs_) {
        const auto left = static_cast<SubwordId>(key >> 32);
        const auto right = static_cast<SubwordId>(key & 0xffffffffu);
        auto score = objective_wp(count, units_[left], units_[right]);
        if (!score) continue;
        if (!best || *score > best->score ||
            (*score == best->score && tie_wins(key, best->key))) {
          if (!banned_.contains(key)) best = Candidate{key, *score};
        }
      }
      if (!best || !forms_existing(best->key)) return best;
      banned_.insert(best->key);
    }
  }

  // A pair whose concatenation is already a subword can never be selected:
  // result strings are unique within a ranked vocabulary.
  bool forms_existing(std::uint64_t key) const {
    const auto& l = vocab_.text(static_cast<SubwordId>(key >> 32));
    const auto& r = vocab_.text(static_cast<SubwordId>(key & 0xffffffffu));
    return vocab_.find(l + r).has_value();
  }

  void add_word(std::uint32_t w) {
    const auto& word = state_.words[w];
    for (std::size_t i = 0; i < word.symbols.size(); ++i) {
      units_[word.symbols[i]] += word.freq;
      if (i + 1 == word.symbols.size()) break;
      const auto key = pair_key(word.symbols[i], word.symbols[i + 1]);
      pairs_[key] += word.freq;
      auto& list = where_[key];
      if (list.empty() || list.back() != w) list.push_back(w);
      touched_.push_back(key);
    }
  }

  void remove_word(std::uint32_t w) {
    const auto& word = state_.words[w];
    for (std::size_t i = 0; i < word.symbols.size(); ++i) {
      units_[word.symbols[i]] -= word.freq;
      if (i + 1 == word.symbols.size()) break;
      const auto key = pair_key(word.symbols[i], word.symbols[i + 1]);
      auto it = pairs_.find(key);
      it->second -= word.freq;
      touched_.push_back(key);
    }
  }

  void apply(const Merge& merge) {
    const auto key = pair_key(merge.left, merge.right);
    ++epoch_;
    touched_.clear();
    // where_ may be modified by add_word while we walk the list, so take it.
    std::vector<std::uint32_t> list = std::move(where_[key]);
    where_.erase(key);
    for (std::uint32_t w : list) {
      if (stamp_[w] == epoch_) continue;
      stamp_[w] = epoch_;
      auto& symbols = state_.words[w].symbols;
      bool present = false;
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
        if (symbols[i] == merge.left && symbols[i + 1] == merge.right) {
          present = true;
          break;
        }
      }
      if (!present) continue;
      remove_word(w);
      symbols = apply_merge(symbols, merge);
      add_word(w);
    }
    std::sort(touched_.begin(), touched_.end());
    touched_.erase(std::unique(touched_.begin(), touched_.end()),
                   touched_.end());
    for (auto k : touched_) {
      auto it = pairs_.find(k);
      if (it == pairs_.end()) continue;
      if (it->second == 0) {
        pairs_.erase(it);
        where_.erase(k);
      } else if (vocab_.objective() == Objective::bpe_count) {
        heap_.push({it->second, k});
      }
    }
  }

  CorpusState state_;
  RankedVocabulary& vocab_;
  std::unordered_map<std::uint64_t, std::uint64_t> pairs_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> where_;
  std::vector<std::uint64_t> units_;
  std::vector<std::uint64_t> touched_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::unordered_set<std::uint64_t> banned_;

  struct HeapOrder {
    const Trainer* self;
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
      if (a.count != b.count) return a.count < b.count;
      return self->tie_wins(b.key, a.key);
    }
  };
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapOrder> heap_{
      HeapOrder{this}};
};

}  // namespace

RankedVocabulary train_ranked_vocab(std::span<const std::string> corpus,
                                    const TrainOptions& options) {
  bool any = false;
  for (const auto& doc : corpus) any = any || !doc.empty();
  if (!any) throw InvalidArgument("training corpus is empty");
  Alphabet alphabet = options.alphabet_mode == AlphabetMode::full_bytes
                          ? Alphabet::full_bytes()
                          : Alphabet::observed(corpus);
  RankedVocabulary vocab(alphabet, options.objective, options.pretokenise);
  if (options.max_merges == 0) return vocab;
  Trainer trainer(make_corpus_state(corpus, alphabet, options.pretokenise),
                  vocab);
  trainer.run(options.max_merges);
  return vocab;
}

}  // namespace tokbias
