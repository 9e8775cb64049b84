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

#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "tokbias/error.hpp"
#include "tokbias/lm.hpp"

using namespace tokbias;

namespace {

std::shared_ptr<const RankedVocabulary> chars(const std::string& symbols) {
  return std::make_shared<const RankedVocabulary>(
      Alphabet::observed(std::vector<std::string>{symbols}),
      Objective::bpe_count);
}

double total_mass(const LanguageModel& m, std::span<const SubwordId> ctx) {
  double s = 0.0;
  for (SubwordId w = 0; w <= m.vocab_size(); ++w) s += std::exp(m.logprob(ctx, w));
  return s;
}

}  // namespace

TEST_CASE("uniform backend") {
  const UniformModel m(256);
  const std::vector<SubwordId> ctx{1, 2, 3};
  CHECK(m.logprob(ctx, 7) == doctest::Approx(std::log(1.0 / 257)));
  CHECK(m.logprob({}, m.eos()) == doctest::Approx(-5.549).epsilon(1e-4));
  CHECK_THROWS_AS(m.logprob(ctx, 258), UnknownIdError);
  CHECK(total_mass(m, ctx) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bigram counts on abab with add-one smoothing") {
  // Oracle: explicit count table. Histories (BOS-padded) -> next:
  //   BOS->a, a->b, b->a, a->b, b->EOS
  std::map<std::pair<int, int>, int> table{{{-1, 0}, 1}, {{0, 1}, 2},
                                           {{1, 0}, 1}, {{1, 2}, 1}};
  std::map<int, int> hist{{-1, 1}, {0, 2}, {1, 2}};
  const std::vector<std::vector<SubwordId>> corpus{{0, 1, 0, 1}};
  const auto m = train_ngram(corpus, 2, 2, 1.0);
  for (int h : {-1, 0, 1}) {
    std::vector<SubwordId> ctx;
    if (h >= 0) ctx.push_back(static_cast<SubwordId>(h));
    for (int w = 0; w <= 2; ++w) {
      const double expect =
          (table[{h, w}] + 1.0) / (hist[h] + 1.0 * 3);
      CHECK(m->logprob(ctx, static_cast<SubwordId>(w)) ==
            doctest::Approx(std::log(expect)));
    }
  }
  const std::vector<SubwordId> a{0};
  CHECK(m->logprob(a, 1) == doctest::Approx(std::log(3.0 / 5.0)));
  CHECK(m->count(a, 1) == 2);
  CHECK(m->history_count(a) == 2);
}

TEST_CASE("unigram on a single token") {
  const std::vector<std::vector<SubwordId>> corpus{{0}};
  const auto m = train_ngram(corpus, 1, 1, 1.0);
  CHECK(m->logprob({}, 0) == doctest::Approx(std::log(0.5)));
  CHECK(m->logprob({}, m->eos()) == doctest::Approx(std::log(0.5)));
}

TEST_CASE("n-gram argument checks") {
  const std::vector<std::vector<SubwordId>> corpus{{0}};
  CHECK_THROWS_AS(train_ngram({}, 1, 1, 1.0), InvalidArgument);
  CHECK_THROWS_AS(train_ngram(corpus, 1, 0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(train_ngram(corpus, 1, 2, 0.0), InvalidArgument);
  const std::vector<std::vector<SubwordId>> bad{{3}};
  CHECK_THROWS_AS(train_ngram(bad, 2, 2, 1.0), UnknownIdError);
}

TEST_CASE("n-gram normalises, is finite and deterministic") {
  std::mt19937_64 rng(3);
  std::vector<std::vector<SubwordId>> corpus(30);
  for (auto& doc : corpus) {
    doc.resize(rng() % 40);
    for (auto& t : doc) t = static_cast<SubwordId>(rng() % 12);
  }
  const auto m = train_ngram(corpus, 12, 3, 0.1);
  const auto m2 = train_ngram(corpus, 12, 3, 0.1);
  for (int i = 0; i < 100; ++i) {
    std::vector<SubwordId> ctx(rng() % 6);
    for (auto& t : ctx) t = static_cast<SubwordId>(rng() % 12);
    CHECK(total_mass(*m, ctx) == doctest::Approx(1.0).epsilon(1e-9));
    for (SubwordId w = 0; w <= 12; ++w) {
      const double lp = m->logprob(ctx, w);
      CHECK(std::isfinite(lp));
      CHECK(lp == m2->logprob(ctx, w));
    }
  }
  // Heavy smoothing approaches uniform.
  const auto flat = train_ngram(corpus, 12, 1, 1e9);
  CHECK(flat->logprob({}, 0) == doctest::Approx(std::log(1.0 / 13)).epsilon(1e-6));
}

TEST_CASE("perfect oracle examples") {
  const Tokeniser tok(chars("abc"), 0, TokFn::merge_based);
  const auto a = *tok.source().find("a");
  const auto b = *tok.source().find("b");
  const std::vector<SubwordId> ctx_a{a};

  const auto single = perfect_oracle({{{"ab", 1.0}}}, tok);
  CHECK(single->logprob({}, a) == 0.0);

  const auto two = perfect_oracle({{{"ab", 0.5}, {"ac", 0.5}}}, tok);
  CHECK(std::exp(two->logprob(ctx_a, b)) == doctest::Approx(0.5));
  CHECK(two->logprob(ctx_a, two->eos()) == -INFINITY);

  const auto just_a = perfect_oracle({{{"a", 1.0}}}, tok);
  CHECK(just_a->logprob(ctx_a, just_a->eos()) == 0.0);
  CHECK(just_a->logprob({}, a) == 0.0);
  const std::vector<SubwordId> ctx_b{b};
  CHECK_THROWS_AS(just_a->logprob(ctx_b, a), InvalidArgument);
}

TEST_CASE("perfect oracle validates the language") {
  const Tokeniser tok(chars("ab"), 0, TokFn::merge_based);
  CHECK_THROWS_AS(perfect_oracle({{{"a", 0.5}}}, tok), InvalidArgument);
  CHECK_THROWS_AS(perfect_oracle({{{"a", 0.5}, {"a", 0.5}}}, tok),
                  InvalidArgument);
  CHECK_THROWS_AS(perfect_oracle({{{"a", 1.0}, {"b", 0.0}}}, tok),
                  InvalidArgument);
}

TEST_CASE("perfect oracle telescopes to string probabilities and normalises") {
  std::mt19937_64 rng(11);
  SyntheticLanguage lang;
  double total = 0;
  std::vector<double> w;
  std::set<std::string> seen;
  while (lang.support.size() < 60) {
    std::string s(1 + rng() % 8, 'a');
    for (char& c : s) c = "abc "[rng() % 4];
    if (!seen.insert(s).second) continue;
    const double p = 1.0 + static_cast<double>(rng() % 100);
    lang.support.emplace_back(s, p);
    total += p;
  }
  for (auto& e : lang.support) e.second /= total;

  std::vector<std::string> corpus;
  for (const auto& e : lang.support) corpus.push_back(e.first);
  TrainOptions o;
  o.max_merges = 12;
  auto v = std::make_shared<const RankedVocabulary>(train_ranked_vocab(corpus, o));
  const Tokeniser tok(v, 12, TokFn::merge_based);
  const auto m = perfect_oracle(lang, tok);
  for (const auto& [s, p] : lang.support) {
    const auto ids = tok.tokenise(s);
    double lp = 0.0;
    for (std::size_t t = 0; t < ids.size(); ++t) {
      lp += m->logprob(std::span(ids).first(t), ids[t]);
      CHECK(total_mass(*m, std::span(ids).first(t)) ==
            doctest::Approx(1.0).epsilon(1e-9));
    }
    lp += m->logprob(ids, m->eos());
    CHECK(lp == doctest::Approx(std::log(p)).epsilon(1e-12));
  }
}

TEST_CASE("external log-probs") {
  const auto empty = std::make_unique<ExternalLogProbModel>(
      parse_external_logprobs(""), 10);
  CHECK(empty->size() == 0);
  CHECK_THROWS_AS(empty->lookup(0, 0), Error);

  const auto one = std::make_unique<ExternalLogProbModel>(
      parse_external_logprobs(R"({"doc":0,"pos":0,"id":4,"lp":-1.5})"), 10);
  CHECK(one->lookup(0, 0).logprob == -1.5);
  CHECK(one->token_logprob(0, 0, {}, 4) == -1.5);
  CHECK_THROWS_AS(one->token_logprob(0, 0, {}, 5), Error);
  CHECK_THROWS_AS(one->logprob({}, 4), Error);

  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_external_logprobs(text, "x.jsonl");
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  const std::string a = R"({"doc":0,"pos":0,"id":1,"lp":-1})";
  const std::string b = R"({"doc":0,"pos":1,"id":1,"lp":-1})";
  CHECK(line_of(a + "\n" + a + "\n") == 2);                  // duplicate
  CHECK(line_of(b + "\n" + a + "\n") == 2);                  // unsorted
  CHECK(line_of(a + "\n\n" + R"({"doc":1,"pos":0,"id":1,"lp":0.5})") == 3);
  CHECK(line_of(a + "\n{oops}\n") == 2);                     // malformed
  CHECK(line_of(R"({"doc":0,"pos":0,"id":1})") == 1);       // missing lp
  CHECK(line_of(a + "\n" + b + "\n") == 0);
}
