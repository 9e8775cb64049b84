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

#ifndef TOKBIAS_PIPELINE_HPP_
#define TOKBIAS_PIPELINE_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tokbias/error.hpp"
#include "tokbias/lm.hpp"
#include "tokbias/outcomes.hpp"
#include "tokbias/rd.hpp"
#include "tokbias/stats.hpp"
#include "tokbias/tokeniser.hpp"
#include "tokbias/vocabulary.hpp"

namespace tokbias {

inline constexpr const char* kToolVersion = "0.1.0";

// An error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineConfig {
  std::string train_corpus;
  std::string eval_corpus;
  std::string vocab;  // ranked-vocabulary file; default <out_dir>/vocab.json
  std::string out_dir = "out";

  Objective objective = Objective::bpe_count;
  AlphabetMode alphabet = AlphabetMode::observed;
  bool pretokenise = true;
  std::size_t k_plus = 4000;
  std::size_t cutoff = 2000;
  TokFn tok_fn = TokFn::merge_based;

  std::size_t window = 500;
  std::vector<std::size_t> sweep_windows;
  std::size_t min_occurrences = 5;
  bool include_doc_start = true;
  // Nested-subword exclusion looks at subwords with rank <= K + this many
  // ranks; 0 means the largest window in use.
  std::size_t nested_horizon = 0;

  BackendKind backend = BackendKind::ngram;
  std::size_t ngram_order = 3;
  double ngram_alpha = 0.1;
  std::vector<std::string> external_logprobs;
  // Perfect-oracle language: "escaped-string<TAB>probability" per line.
  std::string language;
  std::size_t synthetic_docs = 2000;  // eval documents sampled from language

  std::vector<Stat> stats = {Stat::mean};
  StdErrorKind se = StdErrorKind::classical;
  int poly_degree = 1;
  bool weighted = false;

  std::uint64_t seed = 0;
  std::size_t threads = 1;

  // Applies one "key = value" setting. Throws InvalidArgument for unknown
  // keys or bad values.
  void set(const std::string& key, const std::string& value);
  // Canonical "key = value" lines, sorted by key.
  std::string to_text() const;
  std::string vocab_path() const;
  // Throws InvalidArgument when K > K+, or required inputs are missing.
  void validate_estimation() const;
};

// Parses a config file of "key = value" lines; '#' starts a comment.
// ParseError carries the line number.
PipelineConfig parse_config(const std::string& text,
                            const std::string& source = "<memory>");
PipelineConfig load_config(const std::string& path);

// 64-bit FNV-1a of the canonical config text, as 16 hex digits.
std::string config_hash(const PipelineConfig& config);

SyntheticLanguage load_language(const std::string& path);
// Draws n strings from the language with a seeded generator.
std::vector<std::string> sample_language(const SyntheticLanguage& language,
                                         std::size_t n, std::uint64_t seed);

struct StageSummary {
  std::vector<std::string> outputs;  // paths written
  std::vector<std::string> messages;  // human-readable progress lines
};

// Each stage writes its outputs under config.out_dir (created if missing)
// together with manifest.json, and throws StageError on failure.
StageSummary cmd_train_tokeniser(const PipelineConfig& config);
StageSummary cmd_tokenise(const PipelineConfig& config,
                          const std::string& input, bool check_roundtrip);
StageSummary cmd_collect(const PipelineConfig& config);
StageSummary cmd_estimate(const PipelineConfig& config);
StageSummary cmd_sweep(const PipelineConfig& config);

}  // namespace tokbias

#endif  // TOKBIAS_PIPELINE_HPP_
