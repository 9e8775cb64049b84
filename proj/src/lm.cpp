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

#include "tokbias/lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_set>

#include "json.hpp"
#include "tokbias/error.hpp"
#include "tokbias/text.hpp"

namespace tokbias {

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::uniform: return "uniform";
    case BackendKind::ngram: return "ngram";
    case BackendKind::perfect_oracle: return "perfect";
    case BackendKind::external_logprobs: return "external";
  }
  return "unknown";
}

void LanguageModel::check_next(SubwordId next) const {
  if (next > vocab_size_) {
    throw UnknownIdError("next-token id " + std::to_string(next) +
                         " is outside the vocabulary (|V| = " +
                         std::to_string(vocab_size_) + ")");
  }
}

void LanguageModel::check_context(std::span<const SubwordId> context) const {
  for (SubwordId id : context) {
    if (id >= vocab_size_) {
      throw UnknownIdError("context id " + std::to_string(id) +
                           " is outside the vocabulary");
    }
  }
}

// --- Uniform ----------------------------------------------------------------

UniformModel::UniformModel(std::size_t vocab_size) : LanguageModel(vocab_size) {
  if (vocab_size == 0) throw InvalidArgument("vocabulary must not be empty");
}

double UniformModel::logprob(std::span<const SubwordId> context,
                             SubwordId next) const {
  check_next(next);
  check_context(context);
  return -std::log(static_cast<double>(vocab_size() + 1));
}

// --- N-gram -----------------------------------------------------------------

namespace {
constexpr SubwordId kBeginOfDocument = std::numeric_limits<SubwordId>::max();
}  // namespace

NgramModel::NgramModel(std::size_t vocab_size, std::size_t order, double alpha)
    : LanguageModel(vocab_size), order_(order), alpha_(alpha) {
  if (order == 0) throw InvalidArgument("n-gram order must be at least 1");
  if (!(alpha > 0.0)) throw InvalidArgument("smoothing alpha must be > 0");
}

std::string NgramModel::history_key(std::span<const SubwordId> context) const {
  const std::size_t n = order_ - 1;
  std::string key(n * sizeof(SubwordId), '\0');
  for (std::size_t i = 0; i < n; ++i) {
    // Slot i holds the token i+1 places before the prediction point.
    const SubwordId id = i < context.size()
                             ? context[context.size() - 1 - i]
                             : kBeginOfDocument;
    std::memcpy(key.data() + i * sizeof(SubwordId), &id, sizeof(SubwordId));
  }
  return key;
}

void NgramModel::add_document(std::span<const SubwordId> doc) {
  check_context(doc);
  for (std::size_t t = 0; t <= doc.size(); ++t) {
    const SubwordId next = t < doc.size() ? doc[t] : eos();
    auto& counts = table_[history_key(doc.first(t))];
    ++counts.total;
    ++counts.next[next];
  }
}

std::uint64_t NgramModel::count(std::span<const SubwordId> history,
                                SubwordId next) const {
  auto it = table_.find(history_key(history));
  if (it == table_.end()) return 0;
  auto jt = it->second.next.find(next);
  return jt == it->second.next.end() ? 0 : jt->second;
}

std::uint64_t NgramModel::history_count(
    std::span<const SubwordId> history) const {
  auto it = table_.find(history_key(history));
  return it == table_.end() ? 0 : it->second.total;
}

double NgramModel::logprob(std::span<const SubwordId> context,
                           SubwordId next) const {
  check_next(next);
  const std::size_t n = order_ - 1;
  check_context(context.size() > n ? context.last(n) : context);
  const double outcomes = static_cast<double>(vocab_size() + 1);
  double c_hw = 0.0;
  double c_h = 0.0;
  auto it = table_.find(history_key(context));
  if (it != table_.end()) {
    c_h = static_cast<double>(it->second.total);
    auto jt = it->second.next.find(next);
    if (jt != it->second.next.end()) c_hw = static_cast<double>(jt->second);
  }
  return std::log((c_hw + alpha_) / (c_h + alpha_ * outcomes));
}

std::unique_ptr<NgramModel> train_ngram(
    std::span<const std::vector<SubwordId>> token_corpus,
    std::size_t vocab_size, std::size_t order, double alpha) {
  if (token_corpus.empty()) {
    throw InvalidArgument("cannot train an n-gram model on an empty corpus");
  }
  auto model = std::make_unique<NgramModel>(vocab_size, order, alpha);
  for (const auto& doc : token_corpus) model->add_document(doc);
  return model;
}

// --- Perfect oracle ---------------------------------------------------------

void SyntheticLanguage::validate() const {
  if (support.empty()) throw InvalidArgument("language has empty support");
  std::unordered_set<std::string_view> seen;
  double total = 0.0;
  for (const auto& [chars, p] : support) {
    if (!(p > 0.0)) {
      throw InvalidArgument("probability of '" + escape(chars) +
                            "' is not positive");
    }
    if (!seen.insert(chars).second) {
      throw InvalidArgument("duplicate support string '" + escape(chars) + "'");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("support probabilities sum to " +
                          std::to_string(total));
  }
}

PerfectOracleModel::PerfectOracleModel(const SyntheticLanguage& language,
                                       const Tokeniser& tok)
    : LanguageModel(tok.vocab_size()) {
  language.validate();
  nodes_.emplace_back();
  for (const auto& [chars, p] : language.support) {
    const auto ids = tok.tokenise(chars);
    int node = 0;
    nodes_[0].mass += p;
    for (SubwordId id : ids) {
      auto [it, inserted] =
          nodes_[node].children.emplace(id, static_cast<int>(nodes_.size()));
      const int next = it->second;
      if (inserted) nodes_.emplace_back();
      node = next;
      nodes_[node].mass += p;
    }
    nodes_[node].end_mass += p;
  }
}

int PerfectOracleModel::walk(std::span<const SubwordId> prefix) const {
  int node = 0;
  for (SubwordId id : prefix) {
    const auto& children = nodes_[node].children;
    auto it = children.find(id);
    if (it == children.end()) return -1;
    node = it->second;
  }
  return node;
}

double PerfectOracleModel::prefix_mass(
    std::span<const SubwordId> prefix) const {
  const int node = walk(prefix);
  return node < 0 ? 0.0 : nodes_[node].mass;
}

double PerfectOracleModel::logprob(std::span<const SubwordId> context,
                                   SubwordId next) const {
  check_next(next);
  check_context(context);
  const int node = walk(context);
  if (node < 0 || nodes_[node].mass <= 0.0) {
    throw InvalidArgument("context has zero mass under the language");
  }
  const Node& n = nodes_[node];
  double num = 0.0;
  if (next == eos()) {
    num = n.end_mass;
  } else if (auto it = n.children.find(next); it != n.children.end()) {
    num = nodes_[it->second].mass;
  }
  if (num <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(num / n.mass);
}

std::unique_ptr<PerfectOracleModel> perfect_oracle(
    const SyntheticLanguage& language, const Tokeniser& tok) {
  return std::make_unique<PerfectOracleModel>(language, tok);
}

// --- External log-probs -----------------------------------------------------

ExternalLogProbModel::ExternalLogProbModel(
    std::vector<ExternalLogProbRecord> records, std::size_t vocab_size)
    : LanguageModel(vocab_size), records_(std::move(records)) {
  for (std::size_t i = 1; i < records_.size(); ++i) {
    const auto& a = records_[i - 1];
    const auto& b = records_[i];
    if (std::tie(a.doc, a.pos) >= std::tie(b.doc, b.pos)) {
      throw InvalidArgument(
          "external records must be strictly sorted by (doc, pos)");
    }
  }
}

const ExternalLogProbRecord& ExternalLogProbModel::lookup(
    std::size_t doc, std::size_t pos) const {
  auto it = std::lower_bound(
      records_.begin(), records_.end(), std::pair(doc, pos),
      [](const ExternalLogProbRecord& r, const std::pair<std::size_t,
                                                         std::size_t>& key) {
        return std::tie(r.doc, r.pos) < std::tie(key.first, key.second);
      });
  if (it == records_.end() || it->doc != doc || it->pos != pos) {
    throw Error("no external log-prob for doc " + std::to_string(doc) +
                ", position " + std::to_string(pos));
  }
  return *it;
}

double ExternalLogProbModel::logprob(std::span<const SubwordId>,
                                     SubwordId) const {
  throw Error("external log-prob backend only answers (doc, pos) lookups");
}

double ExternalLogProbModel::token_logprob(std::size_t doc, std::size_t pos,
                                           std::span<const SubwordId>,
                                           SubwordId next) const {
  const auto& record = lookup(doc, pos);
  if (record.id != next) {
    throw Error("external record at doc " + std::to_string(doc) +
                ", position " + std::to_string(pos) + " has id " +
                std::to_string(record.id) + ", tokenisation has " +
                std::to_string(next));
  }
  return record.logprob;
}

std::vector<ExternalLogProbRecord> parse_external_logprobs(
    const std::string& text, const std::string& source) {
  using nlohmann::json;
  std::vector<ExternalLogProbRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    ExternalLogProbRecord r;
    try {
      const json j = json::parse(line);
      const auto doc = j.at("doc").get<std::int64_t>();
      const auto p = j.at("pos").get<std::int64_t>();
      const auto id = j.at("id").get<std::int64_t>();
      if (doc < 0 || p < 0 || id < 0) {
        throw ParseError(source, line_no, "doc, pos and id must be >= 0");
      }
      r.doc = static_cast<std::size_t>(doc);
      r.pos = static_cast<std::size_t>(p);
      r.id = static_cast<SubwordId>(id);
      r.logprob = j.at("lp").get<double>();
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (!std::isfinite(r.logprob) || r.logprob > 0.0) {
      throw ParseError(source, line_no, "lp must be a finite value <= 0");
    }
    if (!records.empty()) {
      const auto& prev = records.back();
      if (prev.doc == r.doc && prev.pos == r.pos) {
        throw ParseError(source, line_no, "duplicate (doc, pos) record");
      }
      if (std::tie(prev.doc, prev.pos) > std::tie(r.doc, r.pos)) {
        throw ParseError(source, line_no,
                         "records are not sorted by (doc, pos)");
      }
    }
    records.push_back(r);
  }
  return records;
}

std::unique_ptr<ExternalLogProbModel> load_external_logprobs(
    const std::string& path, std::size_t vocab_size) {
  return std::make_unique<ExternalLogProbModel>(
      parse_external_logprobs(read_file(path), path), vocab_size);
}

}  // namespace tokbias
