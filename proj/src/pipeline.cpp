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

#include "tokbias/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "json.hpp"
#include "tokbias/io.hpp"
#include "tokbias/text.hpp"

namespace tokbias {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    if (!value.empty() && value.front() == '-') throw std::invalid_argument("");
    const auto v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw InvalidArgument(key + ": expected a non-negative integer, got '" +
                          value + "'");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument(key + ": expected a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw InvalidArgument(key + ": expected true or false, got '" + value + "'");
}

BackendKind parse_backend(const std::string& value) {
  if (value == "uniform") return BackendKind::uniform;
  if (value == "ngram") return BackendKind::ngram;
  if (value == "perfect" || value == "perfect_oracle") {
    return BackendKind::perfect_oracle;
  }
  if (value == "external" || value == "external_logprobs") {
    return BackendKind::external_logprobs;
  }
  throw InvalidArgument("backend: expected uniform, ngram, perfect or "
                        "external, got '" + value + "'");
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& items, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += fmt(items[i]);
  }
  return out;
}

// Runs f, re-tagging any library error with the stage name.
template <class F>
auto in_stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

// --- Config -----------------------------------------------------------------

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (key == "train_corpus") train_corpus = value;
  else if (key == "eval_corpus") eval_corpus = value;
  else if (key == "vocab") vocab = value;
  else if (key == "out_dir") out_dir = value;
  else if (key == "objective") objective = parse_objective(value);
  else if (key == "alphabet") {
    if (value == "observed") alphabet = AlphabetMode::observed;
    else if (value == "bytes") alphabet = AlphabetMode::full_bytes;
    else throw InvalidArgument("alphabet: expected observed or bytes");
  } else if (key == "pretokenise") pretokenise = parse_bool(key, value);
  else if (key == "k_plus") k_plus = parse_size(key, value);
  else if (key == "cutoff") cutoff = parse_size(key, value);
  else if (key == "tok_fn") tok_fn = parse_tok_fn(value);
  else if (key == "window") window = parse_size(key, value);
  else if (key == "sweep_windows") {
    sweep_windows.clear();
    for (const auto& w : split_list(value)) {
      sweep_windows.push_back(parse_size(key, w));
    }
  } else if (key == "min_occurrences") min_occurrences = parse_size(key, value);
  else if (key == "include_doc_start") {
    include_doc_start = parse_bool(key, value);
  } else if (key == "nested_horizon") nested_horizon = parse_size(key, value);
  else if (key == "backend") backend = parse_backend(value);
  else if (key == "ngram_order") ngram_order = parse_size(key, value);
  else if (key == "ngram_alpha") ngram_alpha = parse_real(key, value);
  else if (key == "external_logprobs") external_logprobs = split_list(value);
  else if (key == "language") language = value;
  else if (key == "synthetic_docs") synthetic_docs = parse_size(key, value);
  else if (key == "stats") {
    stats.clear();
    for (const auto& s : split_list(value)) stats.push_back(parse_stat(s));
    if (stats.empty()) throw InvalidArgument("stats: list is empty");
  } else if (key == "se") {
    if (value == "classical") se = StdErrorKind::classical;
    else if (value == "hc1") se = StdErrorKind::hc1;
    else throw InvalidArgument("se: expected classical or hc1");
  } else if (key == "poly_degree") {
    poly_degree = static_cast<int>(parse_size(key, value));
  } else if (key == "weighted") weighted = parse_bool(key, value);
  else if (key == "seed") seed = parse_size(key, value);
  else if (key == "threads") threads = std::max<std::size_t>(1, parse_size(key, value));
  else throw InvalidArgument("unknown config key '" + key + "'");
}

std::string PipelineConfig::to_text() const {
  std::map<std::string, std::string> kv;
  kv["train_corpus"] = train_corpus;
  kv["eval_corpus"] = eval_corpus;
  kv["vocab"] = vocab;
  kv["out_dir"] = out_dir;
  kv["objective"] = std::string(to_string(objective));
  kv["alphabet"] = alphabet == AlphabetMode::observed ? "observed" : "bytes";
  kv["pretokenise"] = pretokenise ? "true" : "false";
  kv["k_plus"] = std::to_string(k_plus);
  kv["cutoff"] = std::to_string(cutoff);
  kv["tok_fn"] = std::string(to_string(tok_fn));
  kv["window"] = std::to_string(window);
  kv["sweep_windows"] =
      join(sweep_windows, [](std::size_t w) { return std::to_string(w); });
  kv["min_occurrences"] = std::to_string(min_occurrences);
  kv["include_doc_start"] = include_doc_start ? "true" : "false";
  kv["nested_horizon"] = std::to_string(nested_horizon);
  kv["backend"] = std::string(to_string(backend));
  kv["ngram_order"] = std::to_string(ngram_order);
  kv["ngram_alpha"] = format_real(ngram_alpha);
  kv["external_logprobs"] =
      join(external_logprobs, [](const std::string& s) { return s; });
  kv["language"] = language;
  kv["synthetic_docs"] = std::to_string(synthetic_docs);
  kv["stats"] =
      join(stats, [](Stat s) { return std::string(to_string(s)); });
  kv["se"] = se == StdErrorKind::classical ? "classical" : "hc1";
  kv["poly_degree"] = std::to_string(poly_degree);
  kv["weighted"] = weighted ? "true" : "false";
  kv["seed"] = std::to_string(seed);
  kv["threads"] = std::to_string(threads);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string PipelineConfig::vocab_path() const {
  return vocab.empty() ? (fs::path(out_dir) / "vocab.json").string() : vocab;
}

void PipelineConfig::validate_estimation() const {
  if (cutoff > k_plus) {
    throw InvalidArgument("cutoff " + std::to_string(cutoff) +
                          " exceeds k_plus " + std::to_string(k_plus));
  }
  if (eval_corpus.empty() && !(backend == BackendKind::perfect_oracle &&
                               !language.empty())) {
    throw InvalidArgument("eval_corpus is not set");
  }
  if (backend == BackendKind::perfect_oracle && language.empty()) {
    throw InvalidArgument("the perfect backend needs a language file");
  }
  if (backend == BackendKind::external_logprobs && external_logprobs.empty()) {
    throw InvalidArgument("the external backend needs external_logprobs");
  }
  if (backend == BackendKind::ngram && train_corpus.empty()) {
    throw InvalidArgument("the ngram backend needs train_corpus");
  }
}

PipelineConfig parse_config(const std::string& text,
                            const std::string& source) {
  PipelineConfig config;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(source, line_no, "expected key = value");
    }
    try {
      config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return config;
}

PipelineConfig load_config(const std::string& path) {
  PipelineConfig config = parse_config(read_file(path), path);
  // Paths in a config file are relative to the file itself.
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && fs::path(p).is_relative()) p = (base / p).string();
  };
  resolve(config.train_corpus);
  resolve(config.eval_corpus);
  resolve(config.vocab);
  resolve(config.language);
  for (auto& p : config.external_logprobs) resolve(p);
  return config;
}

std::string config_hash(const PipelineConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.to_text()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SyntheticLanguage load_language(const std::string& path) {
  SyntheticLanguage lang;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path, true)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) {
      throw ParseError(path, line_no, "expected string<TAB>probability");
    }
    try {
      lang.support.emplace_back(unescape(line.substr(0, tab)),
                                parse_real("probability", line.substr(tab + 1)));
    } catch (const Error& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  lang.validate();
  return lang;
}

std::vector<std::string> sample_language(const SyntheticLanguage& language,
                                         std::size_t n, std::uint64_t seed) {
  language.validate();
  std::vector<double> weights;
  for (const auto& entry : language.support) weights.push_back(entry.second);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(language.support[pick(rng)].first);
  }
  return out;
}

// --- Stages -----------------------------------------------------------------

namespace {

fs::path prepare_out_dir(const PipelineConfig& config) {
  const fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error("cannot create output directory " + dir.string() + ": " +
                ec.message());
  }
  return dir;
}

// manifest.json holds one entry per command run in the directory.
void write_manifest(const PipelineConfig& config, const std::string& command,
                    const std::vector<std::string>& outputs) {
  const fs::path path = fs::path(config.out_dir) / "manifest.json";
  ojson manifest = ojson::object();
  if (fs::exists(path)) {
    try {
      manifest = ojson::parse(read_file(path.string()));
    } catch (const std::exception&) {
      manifest = ojson::object();
    }
  }
  manifest["tool"] = "tokbias";
  manifest["version"] = kToolVersion;
  manifest["vocabulary_format"] = kVocabularyFormatVersion;
  ojson entry;
  entry["config_hash"] = config_hash(config);
  ojson cfg = ojson::object();
  std::stringstream ss(config.to_text());
  std::string line;
  while (std::getline(ss, line)) {
    const auto eq = line.find(" = ");
    cfg[line.substr(0, eq)] = line.substr(eq + 3);
  }
  entry["config"] = std::move(cfg);
  ojson outs = ojson::array();
  for (const auto& o : outputs) {
    outs.push_back(fs::path(o).lexically_relative(config.out_dir).string());
  }
  entry["outputs"] = std::move(outs);
  manifest["commands"][command] = std::move(entry);
  write_file_atomic(path.string(), manifest.dump(2) + "\n");
}

std::vector<std::string> train_documents(const PipelineConfig& config) {
  if (!config.train_corpus.empty()) return read_lines(config.train_corpus);
  if (!config.language.empty()) {
    std::vector<std::string> docs;
    for (const auto& entry : load_language(config.language).support) {
      docs.push_back(entry.first);
    }
    return docs;
  }
  throw InvalidArgument("train_corpus is not set");
}

std::vector<std::string> eval_documents(const PipelineConfig& config) {
  if (!config.eval_corpus.empty()) return read_lines(config.eval_corpus);
  return sample_language(load_language(config.language),
                         config.synthetic_docs, config.seed);
}

struct Backend {
  std::string suffix;  // distinguishes outputs of several external files
  std::unique_ptr<LanguageModel> model;
};

std::vector<Backend> build_backends(const PipelineConfig& config,
                                    const Tokeniser& tok) {
  std::vector<Backend> out;
  switch (config.backend) {
    case BackendKind::uniform:
      out.push_back({"", std::make_unique<UniformModel>(tok.vocab_size())});
      break;
    case BackendKind::ngram: {
      const auto docs = read_lines(config.train_corpus);
      const auto streams = tokenise_corpus(tok, docs);
      out.push_back({"", train_ngram(streams, tok.vocab_size(),
                                     config.ngram_order, config.ngram_alpha)});
      break;
    }
    case BackendKind::perfect_oracle:
      out.push_back({"", perfect_oracle(load_language(config.language), tok)});
      break;
    case BackendKind::external_logprobs:
      for (std::size_t i = 0; i < config.external_logprobs.size(); ++i) {
        out.push_back(
            {config.external_logprobs.size() == 1 ? "" : "-" + std::to_string(i),
             load_external_logprobs(config.external_logprobs[i],
                                    tok.vocab_size())});
      }
      break;
  }
  return out;
}

struct Collected {
  std::shared_ptr<const RankedVocabulary> vocab;
  std::unique_ptr<Tokeniser> tok;
  std::size_t window = 0;
  std::vector<std::pair<std::string, OutcomeResult>> results;  // per backend
};

Collected collect(const PipelineConfig& config, std::size_t window,
                  StageSummary& summary) {
  in_stage("config", [&] { config.validate_estimation(); return 0; });
  Collected c;
  c.window = window;
  c.vocab = in_stage("load-vocabulary", [&] {
    return std::make_shared<const RankedVocabulary>(
        load_vocabulary(config.vocab_path()));
  });
  c.tok = in_stage("tokenise", [&] {
    return std::make_unique<Tokeniser>(c.vocab, config.cutoff, config.tok_fn);
  });
  const auto candidates = in_stage("candidates", [&] {
    const auto all = enumerate_candidates(*c.vocab, config.cutoff, window);
    const std::size_t horizon =
        config.nested_horizon ? config.nested_horizon : window;
    auto kept = exclude_nested(all, *c.vocab, config.cutoff + horizon);
    summary.messages.push_back(
        "candidates: " + std::to_string(all.size()) + " enumerated, " +
        std::to_string(all.size() - kept.size()) + " nested excluded");
    return kept;
  });
  const auto docs = in_stage("eval-corpus", [&] { return eval_documents(config); });
  const auto streams =
      in_stage("tokenise", [&] { return tokenise_corpus(*c.tok, docs); });
  auto backends = in_stage("backend", [&] { return build_backends(config, *c.tok); });
  OutcomeOptions options;
  options.min_occurrences = config.min_occurrences;
  options.include_doc_start = config.include_doc_start;
  options.threads = config.threads;
  for (auto& b : backends) {
    auto result = in_stage("collect", [&] {
      return collect_outcomes(docs, streams, *c.tok, *b.model, candidates,
                              options);
    });
    summary.messages.push_back(
        "outcomes" + b.suffix + ": " + std::to_string(result.records.size()) +
        " of " + std::to_string(candidates.size()) + " candidates kept");
    c.results.emplace_back(b.suffix, std::move(result));
  }
  return c;
}

void write_outcomes(const fs::path& dir, const Collected& c,
                    StageSummary& summary) {
  for (const auto& [suffix, result] : c.results) {
    const auto path = (dir / ("outcomes" + suffix + ".csv")).string();
    write_file_atomic(path, outcomes_to_csv(result.records));
    summary.outputs.push_back(path);
    std::string diag =
        "rank,subword,treated,n_samples,n_dropped_mismatch,kept\n";
    for (const auto& d : result.diagnostics) {
      diag += std::to_string(d.candidate.rank) + ',' +
              csv_field(escape(d.candidate.chars)) + ',' +
              (d.candidate.treated ? "1" : "0") + ',' +
              std::to_string(d.n_samples) + ',' +
              std::to_string(d.n_dropped_mismatch) + ',' +
              (d.kept ? "1" : "0") + '\n';
    }
    const auto dpath = (dir / ("candidates" + suffix + ".csv")).string();
    write_file_atomic(dpath, diag);
    summary.outputs.push_back(dpath);
  }
}

RDOptions rd_options(const PipelineConfig& config) {
  RDOptions o;
  o.se = config.se;
  o.poly_degree = config.poly_degree;
  o.weighted = config.weighted;
  return o;
}

}  // namespace

StageSummary cmd_train_tokeniser(const PipelineConfig& config) {
  StageSummary summary;
  const auto t0 = std::chrono::steady_clock::now();
  in_stage("train-tokeniser", [&] { return prepare_out_dir(config); });
  const auto docs = in_stage("train-tokeniser", [&] { return train_documents(config); });
  const auto vocab = in_stage("train-tokeniser", [&] {
    TrainOptions options;
    options.objective = config.objective;
    options.max_merges = config.k_plus;
    options.alphabet_mode = config.alphabet;
    options.pretokenise = config.pretokenise;
    return train_ranked_vocab(docs, options);
  });
  const auto path = config.vocab_path();
  in_stage("train-tokeniser", [&] {
    save_vocabulary(vocab, path);
    return 0;
  });
  summary.outputs.push_back(path);
  summary.messages.push_back("merges: " + std::to_string(vocab.max_rank()) +
                             (vocab.truncated() ? " (ran out of pairs)" : ""));
  summary.messages.push_back("elapsed: " + fixed(seconds_since(t0), 3) + " s");
  in_stage("manifest", [&] {
    write_manifest(config, "train-tokeniser", summary.outputs);
    return 0;
  });
  return summary;
}

StageSummary cmd_tokenise(const PipelineConfig& config,
                          const std::string& input, bool check_roundtrip) {
  StageSummary summary;
  const auto dir = in_stage("tokenise", [&] { return prepare_out_dir(config); });
  auto vocab = in_stage("load-vocabulary", [&] {
    return std::make_shared<const RankedVocabulary>(
        load_vocabulary(config.vocab_path()));
  });
  const Tokeniser tok = in_stage("tokenise", [&] {
    return Tokeniser(vocab, config.cutoff, config.tok_fn);
  });
  const auto docs = in_stage("tokenise", [&] { return read_lines(input); });
  const auto t0 = std::chrono::steady_clock::now();
  const auto streams = in_stage("tokenise", [&] { return tokenise_corpus(tok, docs); });
  const double secs = seconds_since(t0);
  if (check_roundtrip) {
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (tok.detokenise(streams[i]) != docs[i]) {
        throw StageError("tokenise", "round-trip mismatch in document " +
                                         std::to_string(i));
      }
    }
    summary.messages.push_back("round-trip: ok (" +
                               std::to_string(docs.size()) + " documents)");
  }
  std::size_t n_tokens = 0;
  for (const auto& s : streams) n_tokens += s.size();
  const auto stem = fs::path(input).stem().string();
  const auto tokens_path = (dir / (stem + ".tokens")).string();
  const auto map_path = (dir / "token_map.tsv").string();
  in_stage("tokenise", [&] {
    write_file_atomic(tokens_path, token_stream_to_text(streams));
    write_file_atomic(map_path, token_map_to_text(tok));
    return 0;
  });
  summary.outputs = {tokens_path, map_path};
  summary.messages.push_back(
      "tokens: " + std::to_string(n_tokens) + " in " +
      std::to_string(docs.size()) + " documents, " +
      fixed(secs > 0 ? static_cast<double>(n_tokens) / secs : 0.0, 0) +
      " tokens/s");
  in_stage("manifest", [&] {
    write_manifest(config, "tokenise", summary.outputs);
    return 0;
  });
  return summary;
}

StageSummary cmd_collect(const PipelineConfig& config) {
  StageSummary summary;
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = in_stage("collect", [&] { return prepare_out_dir(config); });
  const auto c = collect(config, config.window, summary);
  in_stage("collect", [&] {
    write_outcomes(dir, c, summary);
    return 0;
  });
  summary.messages.push_back("elapsed: " + fixed(seconds_since(t0), 3) + " s");
  in_stage("manifest", [&] {
    write_manifest(config, "collect", summary.outputs);
    return 0;
  });
  return summary;
}

StageSummary cmd_estimate(const PipelineConfig& config) {
  StageSummary summary;
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = in_stage("estimate", [&] { return prepare_out_dir(config); });
  std::vector<std::size_t> windows = config.sweep_windows;
  const bool sweep = !windows.empty();
  if (!sweep) windows.push_back(config.window);
  const std::size_t widest = *std::max_element(windows.begin(), windows.end());
  const auto c = collect(config, widest, summary);
  in_stage("estimate", [&] {
    write_outcomes(dir, c, summary);
    return 0;
  });
  for (const auto& [suffix, result] : c.results) {
    for (Stat stat : config.stats) {
      for (std::size_t w : windows) {
        const std::string tag = suffix + "-" + std::string(to_string(stat)) +
                                (sweep ? "-w" + std::to_string(w) : "");
        in_stage("estimate", [&] {
          const auto data =
              make_rd_dataset(result.records, config.cutoff, w, stat);
          const auto fit = fit_rd(data, rd_options(config));
          ojson report = ojson::parse(fit_report_json(fit));
          if (config.backend == BackendKind::uniform) {
            report["uniform_bound"] =
                std::log(static_cast<double>(c.tok->vocab_size() + 1));
            report["uniform_bound_ok"] =
                uniform_model_bound_check(fit, c.tok->vocab_size() + 1);
          }
          const auto rpath = (dir / ("report" + tag + ".json")).string();
          const auto fpath = (dir / ("fitted" + tag + ".csv")).string();
          write_file_atomic(rpath, report.dump(2) + "\n");
          write_file_atomic(fpath, fitted_values_csv(fit, data));
          summary.outputs.push_back(rpath);
          summary.outputs.push_back(fpath);
          summary.messages.push_back(
              "fit" + tag + ": tau_hat = " + fixed(fit.tau_hat, 4) +
              " (se " + fixed(fit.se_tau, 4) + "), " +
              std::to_string(fit.n_treated) + " treated, " +
              std::to_string(fit.n_control) + " control");
          return 0;
        });
      }
    }
  }
  summary.messages.push_back("elapsed: " + fixed(seconds_since(t0), 3) + " s");
  in_stage("manifest", [&] {
    write_manifest(config, "estimate", summary.outputs);
    return 0;
  });
  return summary;
}

StageSummary cmd_sweep(const PipelineConfig& config) {
  StageSummary summary;
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = in_stage("sweep", [&] { return prepare_out_dir(config); });
  if (config.sweep_windows.empty()) {
    throw StageError("sweep", "sweep_windows is empty");
  }
  // Infeasible windows are reported by window_sweep, so only collect up to
  // the widest window the vocabulary supports.
  std::size_t usable = 0;
  for (std::size_t w : config.sweep_windows) {
    if (w >= 1 && w < config.cutoff && config.cutoff + w <= config.k_plus) {
      usable = std::max(usable, w);
    }
  }
  if (usable == 0) {
    throw StageError("sweep", "no window in sweep_windows is feasible");
  }
  const auto c = collect(config, usable, summary);
  in_stage("sweep", [&] {
    write_outcomes(dir, c, summary);
    return 0;
  });
  for (const auto& [suffix, result] : c.results) {
    for (Stat stat : config.stats) {
      in_stage("sweep", [&] {
        const auto entries =
            window_sweep(result.records, config.cutoff, config.sweep_windows,
                         c.vocab->max_rank(), stat, rd_options(config));
        ojson out = ojson::array();
        for (const auto& e : entries) {
          if (e.fit) {
            out.push_back(ojson::parse(fit_report_json(*e.fit)));
            summary.messages.push_back(
                "window " + std::to_string(e.window) + " " +
                std::string(to_string(stat)) + suffix + ": tau_hat = " +
                fixed(e.fit->tau_hat, 4) + " (se " + fixed(e.fit->se_tau, 4) +
                ")");
          } else {
            out.push_back({{"window", e.window}, {"skipped", e.diagnostic}});
            summary.messages.push_back("window " + std::to_string(e.window) +
                                       " skipped: " + e.diagnostic);
          }
        }
        const auto path = (dir / ("sweep" + suffix + "-" +
                                  std::string(to_string(stat)) + ".json"))
                              .string();
        write_file_atomic(path, out.dump(2) + "\n");
        summary.outputs.push_back(path);
        return 0;
      });
    }
  }
  summary.messages.push_back("elapsed: " + fixed(seconds_since(t0), 3) + " s");
  in_stage("manifest", [&] {
    write_manifest(config, "sweep", summary.outputs);
    return 0;
  });
  return summary;
}

}  // namespace tokbias
