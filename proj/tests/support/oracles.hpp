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

// Slow, obviously-correct reference implementations used only by tests.
// None of them share code with the library beyond plain data types.

#ifndef TOKBIAS_TESTS_ORACLES_HPP_
#define TOKBIAS_TESTS_ORACLES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct Merge {
  std::string left;
  std::string right;
  double score = 0.0;
};

struct Trained {
  std::vector<Merge> merges;
  bool truncated = false;
};

inline bool ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

// Whitespace attaches to the following word.
inline std::vector<std::string> chunks(const std::string& doc) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (i > 0 && ws(doc[i]) && !ws(doc[i - 1])) {
      out.push_back(cur);
      cur.clear();
    }
    cur += doc[i];
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::vector<std::string> merge_pass(const std::vector<std::string>& s,
                                           const std::string& l,
                                           const std::string& r) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i + 1 < s.size() && s[i] == l && s[i + 1] == r) {
      out.push_back(l + r);
      ++i;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

// Recounts every pair from scratch at every step. Each chunk occurrence is
// kept separately (no deduplication). Scores compare as exact rationals.
inline Trained train(const std::vector<std::string>& corpus, bool wp,
                     std::size_t k_plus, bool pretok = true) {
  std::vector<std::vector<std::string>> words;
  std::set<std::string> vocab;
  for (const auto& doc : corpus) {
    std::vector<std::string> pieces =
        pretok ? chunks(doc) : std::vector<std::string>{doc};
    for (const auto& p : pieces) {
      if (p.empty()) continue;
      std::vector<std::string> w;
      for (char c : p) {
        w.emplace_back(1, c);
        vocab.insert(std::string(1, c));
      }
      words.push_back(w);
    }
  }
  Trained out;
  while (out.merges.size() < k_plus) {
    std::map<std::pair<std::string, std::string>, std::uint64_t> pairs;
    std::map<std::string, std::uint64_t> units;
    for (const auto& w : words) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        ++units[w[i]];
        if (i + 1 < w.size()) ++pairs[{w[i], w[i + 1]}];
      }
    }
    bool found = false;
    std::pair<std::string, std::string> best;
    std::uint64_t bn = 0, bd = 1;  // score = bn / bd
    for (const auto& [p, c] : pairs) {
      if (vocab.count(p.first + p.second)) continue;
      const std::uint64_t n = c;
      const std::uint64_t d = wp ? units[p.first] * units[p.second] : 1;
      const auto lhs = static_cast<unsigned __int128>(n) * bd;
      const auto rhs = static_cast<unsigned __int128>(bn) * d;
      if (!found || lhs > rhs || (lhs == rhs && p > best)) {
        found = true;
        best = p;
        bn = n;
        bd = d;
      }
    }
    if (!found) {
      out.truncated = true;
      break;
    }
    out.merges.push_back({best.first, best.second,
                          static_cast<double>(bn) / static_cast<double>(bd)});
    vocab.insert(best.first + best.second);
    for (auto& w : words) w = merge_pass(w, best.first, best.second);
  }
  return out;
}

// Folds merges 1..k over the characters of `chars`.
inline std::vector<std::string> fold(const std::string& chars,
                                     const std::vector<Merge>& merges,
                                     std::size_t k) {
  std::vector<std::string> s;
  for (char c : chars) s.emplace_back(1, c);
  for (std::size_t i = 0; i < k; ++i) {
    s = merge_pass(s, merges[i].left, merges[i].right);
  }
  return s;
}

inline std::vector<std::string> longest_prefix(const std::string& chars,
                                               const std::set<std::string>& v) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < chars.size()) {
    std::size_t len = chars.size() - pos;
    while (len > 1 && !v.count(chars.substr(pos, len))) --len;
    out.push_back(chars.substr(pos, len));
    pos += len;
  }
  return out;
}

// --- statistics ---

inline double mean(std::vector<double> x) {
  long double s = 0;
  for (double v : x) s += v;
  return static_cast<double>(s / x.size());
}

inline double pstd(std::vector<double> x) {
  const double m = mean(x);
  long double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(static_cast<double>(s / x.size()));
}

// Type-7 quantile written in 1-based order-statistic form.
inline double quantile(std::vector<double> x, double p) {
  std::sort(x.begin(), x.end());
  const double pos = 1.0 + (x.size() - 1) * p;  // 1-based
  const double fl = std::floor(pos);
  const auto j = static_cast<std::size_t>(fl);
  if (j >= x.size()) return x.back();
  return x[j - 1] + (pos - fl) * (x[j] - x[j - 1]);
}

inline double median(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

// --- least squares ---

using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 inverse3(const Mat3& a) {
  const double det =
      a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
      a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
      a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  Mat3 inv;
  inv[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
  inv[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
  inv[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
  inv[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
  inv[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
  inv[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
  inv[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
  inv[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
  inv[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;
  return inv;
}

struct Ols {
  std::array<double, 3> theta;  // alpha, beta, tau
  double se_tau;
};

// Regressors [1, r/1000, W] by explicit normal equations.
inline Ols ols(const std::vector<double>& rank, const std::vector<int>& w,
               const std::vector<double>& y) {
  Mat3 xtx{};
  std::array<double, 3> xty{};
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::array<double, 3> x{1.0, rank[i] / 1000.0, double(w[i])};
    for (int a = 0; a < 3; ++a) {
      xty[a] += x[a] * y[i];
      for (int b = 0; b < 3; ++b) xtx[a][b] += x[a] * x[b];
    }
  }
  const Mat3 inv = inverse3(xtx);
  Ols out{};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) out.theta[a] += inv[a][b] * xty[b];
  }
  double rss = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double f = out.theta[0] + out.theta[1] * rank[i] / 1000.0 +
                     out.theta[2] * w[i];
    rss += (y[i] - f) * (y[i] - f);
  }
  out.se_tau = std::sqrt(rss / (y.size() - 3) * inv[2][2]);
  return out;
}

// --- alignment ---

// Offsets at which a token starts, plus the total length.
inline std::set<std::size_t> boundaries(const std::vector<std::string>& toks) {
  std::set<std::size_t> b{0};
  std::size_t off = 0;
  for (const auto& t : toks) b.insert(off += t.size());
  return b;
}

}  // namespace oracle

#endif  // TOKBIAS_TESTS_ORACLES_HPP_
