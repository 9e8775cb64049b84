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

#ifndef TOKBIAS_OUTCOMES_HPP_
#define TOKBIAS_OUTCOMES_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tokbias/lm.hpp"
#include "tokbias/stats.hpp"
#include "tokbias/tokeniser.hpp"
#include "tokbias/vocabulary.hpp"

namespace tokbias {

struct CandidateSubword {
  SubwordId id = 0;
  std::string chars;
  std::size_t rank = 0;
  bool treated = false;  // rank <= K

  bool operator==(const CandidateSubword&) const = default;
};

// Merge results with ranks in [K - window + 1, K + window].
// Throws InvalidArgument unless window >= 1, K - window >= 1 and
// K + window <= vocab.max_rank().
std::vector<CandidateSubword> enumerate_candidates(
    const RankedVocabulary& vocab, std::size_t cutoff, std::size_t window);

// Drops every candidate whose string is a proper substring of some string in
// `vocabulary`. Order is preserved.
std::vector<CandidateSubword> exclude_nested(
    std::span<const CandidateSubword> candidates,
    std::span<const std::string> vocabulary);

// Same, with the vocabulary taken as every subword of `vocab` with rank
// <= max_rank (alphabet included).
std::vector<CandidateSubword> exclude_nested(
    std::span<const CandidateSubword> candidates,
    const RankedVocabulary& vocab, std::size_t max_rank);

struct OccurrenceSample {
  std::size_t doc = 0;
  std::size_t char_offset = 0;
  std::size_t token_start = 0;
  std::size_t token_length = 0;
  double logprob = 0.0;
};

struct OutcomeOptions {
  std::size_t min_occurrences = 5;
  // Keep occurrences whose span starts at the first token of a document
  // (empty context).
  bool include_doc_start = true;
  std::size_t threads = 1;
  // Retain every accepted occurrence in OutcomeResult::samples.
  bool keep_samples = false;
};

struct OutcomeRecord {
  CandidateSubword candidate;
  std::size_t n_samples = 0;
  std::size_t n_dropped_mismatch = 0;
  double mean = 0.0;
  double std = 0.0;
  double median = 0.0;
  double iqr = 0.0;

  double value(Stat stat) const;
};

struct CandidateDiagnostics {
  CandidateSubword candidate;
  std::size_t n_samples = 0;
  // Occurrences whose boundaries do not fall on token boundaries, or whose
  // aligned span has the wrong length for the candidate's treatment.
  std::size_t n_dropped_mismatch = 0;
  bool kept = false;  // n_samples >= min_occurrences
};

struct OutcomeResult {
  std::vector<OutcomeRecord> records;            // kept candidates only
  std::vector<CandidateDiagnostics> diagnostics;  // one per input candidate
  // Per input candidate, filled when keep_samples is set.
  std::vector<std::vector<OccurrenceSample>> samples;
  std::size_t n_tokens = 0;
};

// For every candidate, finds all (overlapping) occurrences of its string in
// each document and keeps those whose start and end fall on token
// boundaries of the document's tokenisation. A treated candidate must span
// exactly one token, a control candidate at least two. The sample is the
// summed log-probability of the span's tokens, each conditioned on all
// preceding tokens of the document.
//
// Throws InvalidArgument when the backend and tokeniser disagree on the
// vocabulary size or a candidate's treatment flag disagrees with the
// tokeniser's cutoff.
OutcomeResult collect_outcomes(std::span<const std::string> eval_corpus,
                               const Tokeniser& tok,
                               const LanguageModel& backend,
                               std::span<const CandidateSubword> candidates,
                               const OutcomeOptions& options = {});

// Same, reusing an existing tokenisation of eval_corpus.
OutcomeResult collect_outcomes(
    std::span<const std::string> eval_corpus,
    std::span<const std::vector<SubwordId>> tokenised, const Tokeniser& tok,
    const LanguageModel& backend, std::span<const CandidateSubword> candidates,
    const OutcomeOptions& options = {});

// Outcome CSV with header
//   rank,subword,treated,n_samples,mean,std,median,iqr,n_dropped_mismatch
// Subword strings are escaped (see escape()). Reading back gives records
// with candidate.id = 0.
std::string outcomes_to_csv(std::span<const OutcomeRecord> records);
std::vector<OutcomeRecord> outcomes_from_csv(
    const std::string& text, const std::string& source = "<memory>");

}  // namespace tokbias

#endif  // TOKBIAS_OUTCOMES_HPP_
