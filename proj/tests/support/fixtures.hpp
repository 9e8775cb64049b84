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

// Synthetic vocabularies and languages shared by the unit and acceptance
// tests.

#ifndef TOKBIAS_TESTS_FIXTURES_HPP_
#define TOKBIAS_TESTS_FIXTURES_HPP_

#include <cstdint>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tokbias/lm.hpp"
#include "tokbias/vocabulary.hpp"

namespace fixtures {

// Syllable vocabulary with |V| = 256 at cutoff 207.
//   alphabet: space, 40 consonants, 8 vowels (49 symbols)
//   ranks 1..100    consonant-vowel syllables
//   ranks 101..257  two-syllable words
// With `mixed`, every third rank above the cutoff instead extends the
// previous word by one syllable, so it tokenises to three subwords at the
// cutoff.
struct SyllableVocab {
  std::shared_ptr<tokbias::RankedVocabulary> vocab;
  std::size_t cutoff = 207;
  std::size_t window = 50;
  std::size_t k_plus = 257;
};

inline SyllableVocab syllable_vocab(bool mixed, std::uint64_t seed = 1) {
  const std::string consonants = "bcdfghjklmnpqrstvwxzBCDFGHJKLMNPQRSTVWXZ";
  const std::string vowels = "aeiouyAE";
  std::vector<unsigned char> symbols{' '};
  for (char c : consonants + vowels) symbols.push_back(static_cast<unsigned char>(c));
  SyllableVocab out;
  out.vocab = std::make_shared<tokbias::RankedVocabulary>(
      tokbias::Alphabet(symbols), tokbias::Objective::bpe_count);
  auto& v = *out.vocab;
  std::vector<tokbias::SubwordId> syllables;
  for (std::size_t i = 0; i < 100; ++i) {
    const std::string c(1, consonants[i % 40]);
    const std::string vw(1, vowels[i / 40]);
    syllables.push_back(v.add_merge(*v.find(c), *v.find(vw), 0).result);
  }
  std::mt19937_64 rng(seed);
  std::set<std::pair<tokbias::SubwordId, tokbias::SubwordId>> used;
  while (v.max_rank() < out.k_plus) {
    const std::size_t rank = v.max_rank() + 1;
    if (mixed && rank > out.cutoff + 1 && rank % 3 == 0) {
      const auto prev = v.merges().back().result;
      const auto s = syllables[rng() % syllables.size()];
      v.add_merge(prev, s, 0);
      continue;
    }
    const auto a = syllables[rng() % syllables.size()];
    const auto b = syllables[rng() % syllables.size()];
    if (!used.insert({a, b}).second) continue;
    v.add_merge(a, b, 0);
  }
  return out;
}

// Documents of space-separated words drawn uniformly from ranks
// [lo, hi] of the vocabulary.
inline std::vector<std::string> word_documents(
    const tokbias::RankedVocabulary& v, std::size_t lo, std::size_t hi,
    std::size_t n_docs, std::size_t words_per_doc, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(lo, hi);
  std::vector<std::string> docs;
  for (std::size_t d = 0; d < n_docs; ++d) {
    std::string doc;
    for (std::size_t w = 0; w < words_per_doc; ++w) {
      if (w) doc += ' ';
      doc += v.text(v.id_for_rank(pick(rng)));
    }
    docs.push_back(doc);
  }
  return docs;
}

// Finite language: phrases of one to three words from a random lexicon,
// with Zipf-like weights. At most n_strings distinct strings.
inline tokbias::SyntheticLanguage synthetic_language(std::size_t n_strings,
                                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::string letters = "abcdefghik";
  std::set<std::string> lex_set;
  while (lex_set.size() < 60) {
    std::string w(2 + rng() % 4, 'a');
    for (char& c : w) c = letters[rng() % letters.size()];
    lex_set.insert(w);
  }
  const std::vector<std::string> lexicon(lex_set.begin(), lex_set.end());
  std::set<std::string> seen;
  tokbias::SyntheticLanguage lang;
  double total = 0.0;
  while (lang.support.size() < n_strings) {
    std::string s;
    const std::size_t n_words = 1 + rng() % 3;
    for (std::size_t i = 0; i < n_words; ++i) {
      if (i) s += ' ';
      // Skewed word choice so subword frequencies span a wide range.
      const double u = std::uniform_real_distribution<double>(0, 1)(rng);
      s += lexicon[static_cast<std::size_t>(u * u * lexicon.size())];
    }
    if (!seen.insert(s).second) continue;
    const double p = 1.0 / static_cast<double>(lang.support.size() + 1);
    lang.support.emplace_back(s, p);
    total += p;
  }
  for (auto& e : lang.support) e.second /= total;
  return lang;
}

}  // namespace fixtures

#endif  // TOKBIAS_TESTS_FIXTURES_HPP_
