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

// tokbias: train a ranked vocabulary, tokenise text, collect subword
// outcomes and estimate the tokenisation effect at a vocabulary cutoff.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tokbias/pipeline.hpp"

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> overrides;  // key=value
  std::size_t cutoff = 0;
  std::size_t window = 0;
  std::size_t k_plus = 0;
  std::string stat;
  std::string backend;
  std::string seed;
  std::string out_dir;
  std::string vocab;
  std::string train;
  std::string eval;
  std::string sweep;
  std::size_t threads = 0;
};

void print_error(const std::string& stage, std::string what) {
  for (char& c : what) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::fprintf(stderr, "error[%s]: %s\n", stage.c_str(), what.c_str());
}

tokbias::PipelineConfig resolve(const Flags& f, const CLI::App& app) {
  tokbias::PipelineConfig config =
      f.config.empty() ? tokbias::PipelineConfig{}
                       : tokbias::load_config(f.config);
  auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("--cutoff")) config.cutoff = f.cutoff;
  if (given("--window")) config.window = f.window;
  if (given("--k-plus")) config.k_plus = f.k_plus;
  if (given("--stat")) config.set("stats", f.stat);
  if (given("--backend")) config.set("backend", f.backend);
  if (given("--seed")) config.set("seed", f.seed);
  if (given("--out-dir")) config.out_dir = f.out_dir;
  if (given("--vocab")) config.vocab = f.vocab;
  if (given("--train")) config.train_corpus = f.train;
  if (given("--eval")) config.eval_corpus = f.eval;
  if (given("--sweep")) config.set("sweep_windows", f.sweep);
  if (given("--threads")) config.set("threads", std::to_string(f.threads));
  for (const auto& kv : f.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw tokbias::InvalidArgument("--set expects key=value, got '" + kv +
                                     "'");
    }
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimate tokenisation bias at a vocabulary cutoff"};
  app.set_version_flag("--version", tokbias::kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--config", f.config, "Config file (key = value lines)");
  app.add_option("--set", f.overrides, "Override a config key (key=value)");
  app.add_option("--cutoff", f.cutoff, "Vocabulary cutoff K");
  app.add_option("--window", f.window, "Ranks on each side of the cutoff");
  app.add_option("--k-plus", f.k_plus, "Merges to train (K+)");
  app.add_option("--stat", f.stat, "Outcome statistic")
      ->check(CLI::IsMember({"mean", "std", "median", "iqr"}));
  app.add_option("--backend", f.backend, "Language-model backend")
      ->check(CLI::IsMember({"uniform", "ngram", "perfect", "external"}));
  app.add_option("--seed", f.seed, "Random seed");
  app.add_option("--out-dir", f.out_dir, "Output directory");
  app.add_option("--vocab", f.vocab, "Ranked-vocabulary file");
  app.add_option("--train", f.train, "Training corpus, one document per line");
  app.add_option("--eval", f.eval, "Evaluation corpus, one document per line");
  app.add_option("--sweep", f.sweep, "Comma-separated window sizes");
  app.add_option("--threads", f.threads, "Worker threads for collection");

  auto* train = app.add_subcommand("train-tokeniser", "Train a ranked vocabulary");
  auto* tokenise = app.add_subcommand("tokenise", "Tokenise a text file");
  std::string input;
  bool decode_check = false;
  tokenise->add_option("input", input, "Text file, one document per line")
      ->required();
  tokenise->add_flag("--decode-check", decode_check,
                     "Verify that decoding reproduces the input");
  auto* collect = app.add_subcommand("collect", "Collect candidate outcomes");
  auto* estimate = app.add_subcommand("estimate", "Collect outcomes and fit");
  auto* sweep = app.add_subcommand("sweep", "Fit over several window sizes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("cli", e.what());
    return 2;
  }

  try {
    const auto config = resolve(f, app);
    tokbias::StageSummary summary;
    if (train->parsed()) summary = tokbias::cmd_train_tokeniser(config);
    if (tokenise->parsed()) {
      summary = tokbias::cmd_tokenise(config, input, decode_check);
    }
    if (collect->parsed()) summary = tokbias::cmd_collect(config);
    if (estimate->parsed()) summary = tokbias::cmd_estimate(config);
    if (sweep->parsed()) summary = tokbias::cmd_sweep(config);
    for (const auto& m : summary.messages) std::cout << m << '\n';
    for (const auto& o : summary.outputs) std::cout << "wrote " << o << '\n';
  } catch (const tokbias::StageError& e) {
    print_error(e.stage(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("config", e.what());
    return 1;
  }
  return 0;
}
