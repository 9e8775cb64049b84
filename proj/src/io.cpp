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

#include "tokbias/io.hpp"

#include <charconv>

#include "json.hpp"
#include "tokbias/error.hpp"
#include "tokbias/text.hpp"

namespace tokbias {

using nlohmann::json;

std::string vocabulary_to_json(const RankedVocabulary& vocab) {
  json doc = json::object();
  doc["version"] = kVocabularyFormatVersion;
  doc["objective_kind"] = std::string(to_string(vocab.objective()));
  doc["pretokenise"] = vocab.pretokenise();
  doc["truncated"] = vocab.truncated();
  json alphabet = json::array();
  for (unsigned char c : vocab.alphabet().symbols()) alphabet.push_back(int{c});
  doc["alphabet"] = std::move(alphabet);
  json merges = json::array();
  for (const auto& m : vocab.merges()) {
    merges.push_back({{"rank", m.rank},
                      {"left", m.left},
                      {"right", m.right},
                      {"result", m.result},
                      {"score", m.score},
                      {"text", vocab.text(m.result)}});
  }
  doc["merges"] = std::move(merges);
  return doc.dump(1, ' ', false, json::error_handler_t::replace) + "\n";
}

RankedVocabulary vocabulary_from_json(const std::string& text,
                                      const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 0, e.what());
  }
  try {
    const int version = doc.at("version").get<int>();
    if (version != kVocabularyFormatVersion) {
      throw ParseError(source, 0,
                       "unsupported version " + std::to_string(version));
    }
    std::vector<unsigned char> symbols;
    for (const auto& c : doc.at("alphabet")) {
      const int v = c.get<int>();
      if (v < 0 || v > 255) throw ParseError(source, 0, "bad alphabet byte");
      symbols.push_back(static_cast<unsigned char>(v));
    }
    RankedVocabulary vocab(
        Alphabet(std::move(symbols)),
        parse_objective(doc.at("objective_kind").get<std::string>()),
        doc.value("pretokenise", true));
    vocab.set_truncated(doc.value("truncated", false));
    std::size_t expected_rank = 1;
    for (const auto& m : doc.at("merges")) {
      const auto rank = m.at("rank").get<std::size_t>();
      if (rank != expected_rank) {
        throw ParseError(source, 0,
                         "merge ranks must be 1, 2, ...; got " +
                             std::to_string(rank) + " at position " +
                             std::to_string(expected_rank));
      }
      const auto& added = vocab.add_merge(m.at("left").get<SubwordId>(),
                                          m.at("right").get<SubwordId>(),
                                          m.at("score").get<double>());
      if (added.result != m.at("result").get<SubwordId>()) {
        throw ParseError(source, 0,
                         "merge " + std::to_string(rank) +
                             " has an inconsistent result id");
      }
      ++expected_rank;
    }
    return vocab;
  } catch (const json::exception& e) {
    throw ParseError(source, 0, e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(source, 0, e.what());
  }
}

void save_vocabulary(const RankedVocabulary& vocab, const std::string& path) {
  write_file_atomic(path, vocabulary_to_json(vocab));
}

RankedVocabulary load_vocabulary(const std::string& path) {
  return vocabulary_from_json(read_file(path), path);
}

std::string token_stream_to_text(
    const std::vector<std::vector<SubwordId>>& docs) {
  std::string out;
  for (const auto& doc : docs) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(doc[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::vector<SubwordId>> token_stream_from_text(
    const std::string& text, const std::string& source) {
  std::vector<std::vector<SubwordId>> docs;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::vector<SubwordId> ids;
    const char* p = text.data() + pos;
    const char* stop = text.data() + end;
    while (p < stop) {
      if (*p == ' ') {
        ++p;
        continue;
      }
      SubwordId id = 0;
      auto [next, ec] = std::from_chars(p, stop, id);
      if (ec != std::errc() || (next < stop && *next != ' ')) {
        throw ParseError(source, line_no, "expected a subword id");
      }
      ids.push_back(id);
      p = next;
    }
    docs.push_back(std::move(ids));
    pos = end + 1;
  }
  return docs;
}

std::string token_map_to_text(const Tokeniser& tok) {
  std::string out;
  for (SubwordId id = 0; id < tok.vocab_size(); ++id) {
    out += std::to_string(id);
    out += '\t';
    out += escape(tok.text(id));
    out += '\n';
  }
  return out;
}

}  // namespace tokbias
