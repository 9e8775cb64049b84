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

#include "tokbias/tokeniser.hpp"

#include <algorithm>
#include <limits>

#include "tokbias/error.hpp"
#include "tokbias/text.hpp"

namespace tokbias {

Tokeniser::Tokeniser(std::shared_ptr<const RankedVocabulary> source,
                     std::size_t cutoff, TokFn kind)
    : source_(std::move(source)), cutoff_(cutoff), kind_(kind) {
  if (!source_) throw InvalidArgument("tokeniser needs a vocabulary");
  if (cutoff_ > source_->max_rank()) {
    throw InvalidArgument("cutoff " + std::to_string(cutoff_) +
                          " exceeds the " +
                          std::to_string(source_->max_rank()) +
                          " available merges");
  }
  const auto merges = source_->merges().first(cutoff_);
  if (kind_ == TokFn::merge_based) {
    merge_rank_.reserve(merges.size());
    for (const auto& m : merges) {
      merge_rank_.emplace(pair_key(m.left, m.right), m.rank);
    }
    return;
  }
  trie_.emplace_back();
  for (SubwordId id = 0; id < vocab_size(); ++id) {
    int node = 0;
    for (char ch : source_->text(id)) {
      const auto c = static_cast<unsigned char>(ch);
      int next = trie_child(node, c);
      if (next < 0) {
        next = static_cast<int>(trie_.size());
        trie_.emplace_back();
        auto& children = trie_[node].children;
        children.insert(
            std::lower_bound(children.begin(), children.end(),
                             std::pair<unsigned char, int>(c, -1)),
            {c, next});
      }
      node = next;
    }
    trie_[node].id = static_cast<int>(id);
  }
}

int Tokeniser::trie_child(int node, unsigned char c) const {
  const auto& children = trie_[node].children;
  auto it = std::lower_bound(
      children.begin(), children.end(), c,
      [](const std::pair<unsigned char, int>& e, unsigned char v) {
        return e.first < v;
      });
  return it != children.end() && it->first == c ? it->second : -1;
}

std::vector<SubwordId> Tokeniser::to_symbols(std::string_view chars,
                                             std::size_t base) const {
  std::vector<SubwordId> out;
  out.reserve(chars.size());
  const auto& alphabet = source_->alphabet();
  for (std::size_t i = 0; i < chars.size(); ++i) {
    const auto c = static_cast<unsigned char>(chars[i]);
    auto id = alphabet.id_of(c);
    if (!id) throw UnknownSymbolError(c, base + i);
    out.push_back(*id);
  }
  return out;
}

// Repeatedly applies the lowest-ranked merge present. A merge's operands
// always have smaller ids than its result, so once rank r is the minimum
// present no merge of rank < r can reappear; this is therefore the same as
// folding merges 1..K over the string in order.
std::vector<SubwordId> Tokeniser::merge_chunk(std::string_view chars,
                                              std::size_t base) const {
  auto symbols = to_symbols(chars, base);
  const auto merges = source_->merges();
  while (symbols.size() > 1) {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = merge_rank_.find(pair_key(symbols[i], symbols[i + 1]));
      if (it != merge_rank_.end()) best = std::min(best, it->second);
    }
    if (best == std::numeric_limits<std::size_t>::max()) break;
    symbols = apply_merge(symbols, merges[best - 1]);
  }
  return symbols;
}

std::vector<SubwordId> Tokeniser::longest_chunk(std::string_view chars,
                                                std::size_t base) const {
  std::vector<SubwordId> out;
  std::size_t pos = 0;
  while (pos < chars.size()) {
    int node = 0;
    int match = -1;
    std::size_t match_len = 0;
    for (std::size_t i = pos; i < chars.size(); ++i) {
      node = trie_child(node, static_cast<unsigned char>(chars[i]));
      if (node < 0) break;
      if (trie_[node].id >= 0) {
        match = trie_[node].id;
        match_len = i - pos + 1;
      }
    }
    if (match < 0) {
      throw UnknownSymbolError(static_cast<unsigned char>(chars[pos]),
                               base + pos);
    }
    out.push_back(static_cast<SubwordId>(match));
    pos += match_len;
  }
  return out;
}

std::vector<SubwordId> Tokeniser::tokenise_merge(std::string_view chars) const {
  if (kind_ != TokFn::merge_based) {
    throw InvalidArgument("tokeniser is not merge-based");
  }
  return merge_chunk(chars, 0);
}

std::vector<SubwordId> Tokeniser::tokenise_longest_prefix(
    std::string_view chars) const {
  if (kind_ != TokFn::longest_prefix) {
    throw InvalidArgument("tokeniser is not longest-prefix");
  }
  return longest_chunk(chars, 0);
}

std::vector<SubwordId> Tokeniser::tokenise(std::string_view text) const {
  auto chunk_fn = [this](std::string_view chunk, std::size_t base) {
    return kind_ == TokFn::merge_based ? merge_chunk(chunk, base)
                                       : longest_chunk(chunk, base);
  };
  if (!source_->pretokenise()) return chunk_fn(text, 0);
  std::vector<SubwordId> out;
  std::size_t offset = 0;
  for (auto chunk : pretokenise(text)) {
    auto ids = chunk_fn(chunk, offset);
    out.insert(out.end(), ids.begin(), ids.end());
    offset += chunk.size();
  }
  return out;
}

const std::string& Tokeniser::text(SubwordId id) const {
  if (!contains(id)) {
    throw UnknownIdError("subword id " + std::to_string(id) +
                         " is outside the vocabulary of size " +
                         std::to_string(vocab_size()));
  }
  return source_->text(id);
}

std::string Tokeniser::detokenise(std::span<const SubwordId> ids) const {
  std::string out;
  for (SubwordId id : ids) out += text(id);
  return out;
}

Tokeniser truncate(std::shared_ptr<const RankedVocabulary> source,
                   std::size_t cutoff, TokFn kind) {
  return Tokeniser(std::move(source), cutoff, kind);
}

std::vector<SubwordId> tokenise_merge(std::string_view chars,
                                      const Tokeniser& tok) {
  return tok.tokenise_merge(chars);
}

std::vector<SubwordId> tokenise_longest_prefix(std::string_view chars,
                                               const Tokeniser& tok) {
  return tok.tokenise_longest_prefix(chars);
}

std::vector<std::vector<SubwordId>> tokenise_corpus(
    const Tokeniser& tok, std::span<const std::string> docs) {
  std::vector<std::vector<SubwordId>> out;
  out.reserve(docs.size());
  if (!tok.source().pretokenise()) {
    for (const auto& doc : docs) out.push_back(tok.tokenise(doc));
    return out;
  }
  std::unordered_map<std::string_view, std::vector<SubwordId>> cache;
  for (const auto& doc : docs) {
    std::vector<SubwordId> ids;
    std::size_t offset = 0;
    for (auto chunk : pretokenise(doc)) {
      auto it = cache.find(chunk);
      if (it == cache.end()) {
        try {
          it = cache.emplace(chunk, tok.tokenise(chunk)).first;
        } catch (const UnknownSymbolError& e) {
          throw UnknownSymbolError(e.symbol(), offset + e.offset());
        }
      }
      ids.insert(ids.end(), it->second.begin(), it->second.end());
      offset += chunk.size();
    }
    out.push_back(std::move(ids));
  }
  return out;
}

}  // namespace tokbias
