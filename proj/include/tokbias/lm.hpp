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

#ifndef TOKBIAS_LM_HPP_
#define TOKBIAS_LM_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tokbias/tokeniser.hpp"
#include "tokbias/vocabulary.hpp"

namespace tokbias {

enum class BackendKind { uniform, ngram, perfect_oracle, external_logprobs };

std::string_view to_string(BackendKind kind);

// Source of subword-level conditional log-probabilities (natural log).
//
// The outcome space is the vocabulary plus end-of-string, which is
// represented by the id vocab_size(). Backends are immutable once built and
// all queries are const, so they can be shared between threads.
class LanguageModel {
 public:
  explicit LanguageModel(std::size_t vocab_size) : vocab_size_(vocab_size) {}
  virtual ~LanguageModel() = default;

  virtual BackendKind kind() const = 0;

  // |V| without end-of-string.
  std::size_t vocab_size() const { return vocab_size_; }
  SubwordId eos() const { return static_cast<SubwordId>(vocab_size_); }

  // log p(next | context). Throws UnknownIdError when next is neither a
  // vocabulary id nor eos(), or when the context holds an unknown id.
  virtual double logprob(std::span<const SubwordId> context,
                         SubwordId next) const = 0;

  // Log-probability of the token at position `pos` of document `doc`, whose
  // preceding tokens are `context`. Backends that score arbitrary contexts
  // ignore the coordinates; pre-computed backends use only them.
  virtual double token_logprob(std::size_t doc, std::size_t pos,
                               std::span<const SubwordId> context,
                               SubwordId next) const {
    (void)doc;
    (void)pos;
    return logprob(context, next);
  }

 protected:
  void check_next(SubwordId next) const;
  void check_context(std::span<const SubwordId> context) const;

 private:
  std::size_t vocab_size_;
};

// Uniform distribution over V and end-of-string: log(1 / (|V| + 1)).
class UniformModel final : public LanguageModel {
 public:
  explicit UniformModel(std::size_t vocab_size);
  BackendKind kind() const override { return BackendKind::uniform; }
  double logprob(std::span<const SubwordId> context,
                 SubwordId next) const override;
};

// Add-alpha smoothed n-gram model. Histories are the previous order-1
// tokens, padded with a begin-of-document marker at the start of each
// document; one end-of-string token closes every document.
//   p(w | h) = (c(h, w) + alpha) / (c(h) + alpha * (|V| + 1))
class NgramModel final : public LanguageModel {
 public:
  NgramModel(std::size_t vocab_size, std::size_t order, double alpha);

  BackendKind kind() const override { return BackendKind::ngram; }
  double logprob(std::span<const SubwordId> context,
                 SubwordId next) const override;

  std::size_t order() const { return order_; }
  double alpha() const { return alpha_; }
  std::size_t num_histories() const { return table_.size(); }
  std::uint64_t count(std::span<const SubwordId> history, SubwordId next) const;
  std::uint64_t history_count(std::span<const SubwordId> history) const;

  void add_document(std::span<const SubwordId> doc);

 private:
  struct HistoryCounts {
    std::uint64_t total = 0;
    std::unordered_map<SubwordId, std::uint64_t> next;
  };
  std::string history_key(std::span<const SubwordId> context) const;

  std::size_t order_;
  double alpha_;
  std::unordered_map<std::string, HistoryCounts> table_;
};

// Throws InvalidArgument for order 0, alpha <= 0 or an empty corpus.
std::unique_ptr<NgramModel> train_ngram(
    std::span<const std::vector<SubwordId>> token_corpus,
    std::size_t vocab_size, std::size_t order, double alpha);

// Finite distribution over character strings.
struct SyntheticLanguage {
  std::vector<std::pair<std::string, double>> support;

  // Throws InvalidArgument unless probabilities are positive, sum to one
  // within 1e-9 and strings are distinct.
  void validate() const;
};

// The data-generating distribution expressed over a tokeniser's canonical
// tokenisations: p(next | context) is the mass of support strings whose
// tokenisation extends context + next, divided by the mass extending
// context. End-of-string takes the mass of strings tokenised as exactly
// context. Non-canonical subword strings get zero mass.
class PerfectOracleModel final : public LanguageModel {
 public:
  PerfectOracleModel(const SyntheticLanguage& language, const Tokeniser& tok);

  BackendKind kind() const override { return BackendKind::perfect_oracle; }
  // Throws InvalidArgument when the context itself has zero mass. A
  // continuation with zero mass returns -infinity.
  double logprob(std::span<const SubwordId> context,
                 SubwordId next) const override;

  // Mass of strings whose tokenisation starts with `prefix`.
  double prefix_mass(std::span<const SubwordId> prefix) const;

 private:
  struct Node {
    std::unordered_map<SubwordId, int> children;
    double mass = 0.0;
    double end_mass = 0.0;
  };
  int walk(std::span<const SubwordId> prefix) const;

  std::vector<Node> nodes_;
};

std::unique_ptr<PerfectOracleModel> perfect_oracle(
    const SyntheticLanguage& language, const Tokeniser& tok);

struct ExternalLogProbRecord {
  std::size_t doc = 0;
  std::size_t pos = 0;
  SubwordId id = 0;
  double logprob = 0.0;  // nats, <= 0
};

// Pre-computed per-token log-probabilities (e.g. from a neural model). Only
// positional lookups are supported; scoring an arbitrary context throws.
class ExternalLogProbModel final : public LanguageModel {
 public:
  // Records must be sorted by (doc, pos) without duplicates.
  ExternalLogProbModel(std::vector<ExternalLogProbRecord> records,
                       std::size_t vocab_size);

  BackendKind kind() const override {
    return BackendKind::external_logprobs;
  }
  double logprob(std::span<const SubwordId> context,
                 SubwordId next) const override;
  double token_logprob(std::size_t doc, std::size_t pos,
                       std::span<const SubwordId> context,
                       SubwordId next) const override;

  // Throws Error when (doc, pos) has no record.
  const ExternalLogProbRecord& lookup(std::size_t doc, std::size_t pos) const;
  std::size_t size() const { return records_.size(); }

 private:
  std::vector<ExternalLogProbRecord> records_;
};

// JSON-lines reader: one {"doc": int, "pos": int, "id": int, "lp": float}
// per line. Blank lines are skipped. Malformed, unsorted, duplicate or
// positive-logprob records raise ParseError with the 1-based line number.
std::vector<ExternalLogProbRecord> parse_external_logprobs(
    const std::string& text, const std::string& source = "<memory>");
std::unique_ptr<ExternalLogProbModel> load_external_logprobs(
    const std::string& path, std::size_t vocab_size);

}  // namespace tokbias

#endif  // TOKBIAS_LM_HPP_
