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

#include "tokbias/outcomes.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <thread>

#include "tokbias/error.hpp"
#include "tokbias/text.hpp"

namespace tokbias {

std::vector<CandidateSubword> enumerate_candidates(
    const RankedVocabulary& vocab, std::size_t cutoff, std::size_t window) {
  if (window == 0) throw InvalidArgument("window must be at least 1");
  if (window >= cutoff) {
    throw InvalidArgument("window " + std::to_string(window) +
                          " reaches below rank 1 for cutoff " +
                          std::to_string(cutoff));
  }
  if (cutoff + window > vocab.max_rank()) {
    throw InvalidArgument("window " + std::to_string(window) +
                          " needs rank " + std::to_string(cutoff + window) +
                          " but the vocabulary has " +
                          std::to_string(vocab.max_rank()) + " merges");
  }
  std::vector<CandidateSubword> out;
  out.reserve(2 * window);
  for (std::size_t r = cutoff - window + 1; r <= cutoff + window; ++r) {
    const SubwordId id = vocab.id_for_rank(r);
    out.push_back({id, vocab.text(id), r, r <= cutoff});
  }
  return out;
}

std::vector<CandidateSubword> exclude_nested(
    std::span<const CandidateSubword> candidates,
    std::span<const std::string> vocabulary) {
  std::vector<CandidateSubword> out;
  for (const auto& c : candidates) {
    const bool nested = std::any_of(
        vocabulary.begin(), vocabulary.end(), [&](const std::string& item) {
          return item.size() > c.chars.size() &&
                 item.find(c.chars) != std::string::npos;
        });
    if (!nested) out.push_back(c);
  }
  return out;
}

std::vector<CandidateSubword> exclude_nested(
    std::span<const CandidateSubword> candidates,
    const RankedVocabulary& vocab, std::size_t max_rank) {
  max_rank = std::min(max_rank, vocab.max_rank());
  const std::size_t n = vocab.alphabet().size() + max_rank;
  std::vector<std::string> items;
  items.reserve(n);
  for (SubwordId id = 0; id < n; ++id) items.push_back(vocab.text(id));
  return exclude_nested(candidates, items);
}

double OutcomeRecord::value(Stat stat) const {
  switch (stat) {
    case Stat::mean: return mean;
    case Stat::std: return std;
    case Stat::median: return median;
    case Stat::iqr: return iqr;
  }
  return mean;
}

namespace {

struct Partial {
  std::vector<std::vector<OccurrenceSample>> samples;  // per candidate
  std::vector<std::size_t> dropped;
};

void scan_document(std::size_t d, const std::string& text,
                   std::span<const SubwordId> tokens, const Tokeniser& tok,
                   const LanguageModel& backend,
                   std::span<const CandidateSubword> candidates,
                   const OutcomeOptions& options, Partial& out) {
  // token_at[offset] = index of the token starting at offset; the end of the
  // text maps to tokens.size().
  std::vector<std::int64_t> token_at(text.size() + 1, -1);
  std::size_t offset = 0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    token_at[offset] = static_cast<std::int64_t>(t);
    offset += tok.text(tokens[t]).size();
  }
  if (offset != text.size()) {
    throw Error("tokenisation of document " + std::to_string(d) +
                " does not cover its text");
  }
  token_at[offset] = static_cast<std::int64_t>(tokens.size());

  std::vector<double> lp(tokens.size(),
                         std::numeric_limits<double>::quiet_NaN());
  auto token_lp = [&](std::size_t t) {
    if (std::isnan(lp[t])) {
      lp[t] = backend.token_logprob(d, t, tokens.first(t), tokens[t]);
    }
    return lp[t];
  };

  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto& cand = candidates[c];
    const std::string_view needle = cand.chars;
    if (needle.empty()) continue;
    for (auto pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + 1)) {
      const auto start = token_at[pos];
      const auto end = token_at[pos + needle.size()];
      const auto length = end - start;
      const bool ok = start >= 0 && end >= 0 &&
                      (cand.treated ? length == 1 : length >= 2);
      if (!ok) {
        ++out.dropped[c];
        continue;
      }
      if (start == 0 && !options.include_doc_start) continue;
      double sum = 0.0;
      for (auto t = start; t < end; ++t) {
        sum += token_lp(static_cast<std::size_t>(t));
      }
      out.samples[c].push_back({d, pos, static_cast<std::size_t>(start),
                                static_cast<std::size_t>(length), sum});
    }
  }
}

}  // namespace

OutcomeResult collect_outcomes(std::span<const std::string> eval_corpus,
                               const Tokeniser& tok,
                               const LanguageModel& backend,
                               std::span<const CandidateSubword> candidates,
                               const OutcomeOptions& options) {
  const auto tokenised = tokenise_corpus(tok, eval_corpus);
  return collect_outcomes(eval_corpus, tokenised, tok, backend, candidates,
                          options);
}

OutcomeResult collect_outcomes(
    std::span<const std::string> eval_corpus,
    std::span<const std::vector<SubwordId>> tokenised, const Tokeniser& tok,
    const LanguageModel& backend, std::span<const CandidateSubword> candidates,
    const OutcomeOptions& options) {
  if (backend.vocab_size() != tok.vocab_size()) {
    throw InvalidArgument("backend vocabulary size " +
                          std::to_string(backend.vocab_size()) +
                          " does not match the tokeniser's " +
                          std::to_string(tok.vocab_size()));
  }
  if (tokenised.size() != eval_corpus.size()) {
    throw InvalidArgument("token streams and documents differ in number");
  }
  for (const auto& c : candidates) {
    if (c.treated != (c.rank <= tok.cutoff())) {
      throw InvalidArgument("candidate '" + escape(c.chars) + "' (rank " +
                            std::to_string(c.rank) +
                            ") has a treatment flag inconsistent with K = " +
                            std::to_string(tok.cutoff()));
    }
  }

  // Documents are split into contiguous blocks, one per worker; partial
  // results are concatenated in block order so the output does not depend
  // on the thread count.
  const std::size_t n_docs = eval_corpus.size();
  const std::size_t n_workers =
      std::max<std::size_t>(1, std::min(options.threads, n_docs));
  std::vector<Partial> partials(n_workers);
  for (auto& p : partials) {
    p.samples.resize(candidates.size());
    p.dropped.assign(candidates.size(), 0);
  }
  auto work = [&](std::size_t w) {
    const std::size_t lo = n_docs * w / n_workers;
    const std::size_t hi = n_docs * (w + 1) / n_workers;
    for (std::size_t d = lo; d < hi; ++d) {
      scan_document(d, eval_corpus[d], tokenised[d], tok, backend, candidates,
                    options, partials[w]);
    }
  };
  if (n_workers == 1) {
    work(0);
  } else {
    std::vector<std::exception_ptr> errors(n_workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  OutcomeResult result;
  for (const auto& doc : tokenised) result.n_tokens += doc.size();
  if (options.keep_samples) result.samples.resize(candidates.size());
  std::vector<double> values;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    CandidateDiagnostics diag{candidates[c], 0, 0, false};
    values.clear();
    for (auto& p : partials) {
      diag.n_dropped_mismatch += p.dropped[c];
      for (const auto& s : p.samples[c]) values.push_back(s.logprob);
      if (options.keep_samples) {
        auto& dst = result.samples[c];
        dst.insert(dst.end(), p.samples[c].begin(), p.samples[c].end());
      }
      p.samples[c].clear();
      p.samples[c].shrink_to_fit();
    }
    diag.n_samples = values.size();
    diag.kept = !values.empty() && values.size() >= options.min_occurrences;
    if (diag.kept) {
      OutcomeRecord rec;
      rec.candidate = candidates[c];
      rec.n_samples = values.size();
      rec.n_dropped_mismatch = diag.n_dropped_mismatch;
      rec.mean = aggregate(values, Stat::mean);
      rec.std = aggregate(values, Stat::std);
      rec.median = aggregate(values, Stat::median);
      rec.iqr = aggregate(values, Stat::iqr);
      result.records.push_back(std::move(rec));
    }
    result.diagnostics.push_back(std::move(diag));
  }
  return result;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Splits one CSV line, honouring double-quoted fields.
std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

constexpr std::string_view kOutcomeHeader =
    "rank,subword,treated,n_samples,mean,std,median,iqr,n_dropped_mismatch";

}  // namespace

std::string outcomes_to_csv(std::span<const OutcomeRecord> records) {
  std::string out(kOutcomeHeader);
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.candidate.rank) + ',' +
           csv_field(escape(r.candidate.chars)) + ',' +
           (r.candidate.treated ? "1" : "0") + ',' +
           std::to_string(r.n_samples) + ',' + format_double(r.mean) + ',' +
           format_double(r.std) + ',' + format_double(r.median) + ',' +
           format_double(r.iqr) + ',' + std::to_string(r.n_dropped_mismatch) +
           '\n';
  }
  return out;
}

std::vector<OutcomeRecord> outcomes_from_csv(const std::string& text,
                                             const std::string& source) {
  std::vector<OutcomeRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto to_size = [&](const std::string& s) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
      throw ParseError(source, line_no, "expected an integer, got '" + s + "'");
    }
    return v;
  };
  auto to_double = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ParseError(source, line_no, "expected a number, got '" + s + "'");
    }
  };
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != kOutcomeHeader) {
        throw ParseError(source, 1, "unexpected outcome CSV header");
      }
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 9) {
      throw ParseError(source, line_no,
                       "expected 9 fields, got " + std::to_string(f.size()));
    }
    OutcomeRecord r;
    r.candidate.rank = to_size(f[0]);
    try {
      r.candidate.chars = unescape(f[1]);
    } catch (const Error& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (f[2] != "0" && f[2] != "1") {
      throw ParseError(source, line_no, "treated must be 0 or 1");
    }
    r.candidate.treated = f[2] == "1";
    r.n_samples = to_size(f[3]);
    r.mean = to_double(f[4]);
    r.std = to_double(f[5]);
    r.median = to_double(f[6]);
    r.iqr = to_double(f[7]);
    r.n_dropped_mismatch = to_size(f[8]);
    out.push_back(std::move(r));
  }
  if (line_no == 0) throw ParseError(source, 0, "empty outcome file");
  return out;
}

}  // namespace tokbias
