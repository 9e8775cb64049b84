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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <vector>

#include "tokbias/error.hpp"
#include "tokbias/io.hpp"
#include "tokbias/lm.hpp"
#include "tokbias/outcomes.hpp"
#include "tokbias/pipeline.hpp"
#include "tokbias/rd.hpp"
#include "tokbias/stats.hpp"
#include "tokbias/tokeniser.hpp"
#include "tokbias/vocabulary.hpp"

namespace py = pybind11;
using namespace tokbias;

namespace {

py::bytes as_bytes(const std::string& s) { return py::bytes(s); }

std::vector<std::string> summary_list(const StageSummary& s) {
  return s.outputs;
}

}  // namespace

PYBIND11_MODULE(_tokbias, m) {
  m.doc() = "Tokenisation-bias estimation: ranked vocabularies, outcome "
            "collection and regression-discontinuity fits.";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<UnknownSymbolError>(m, "UnknownSymbolError",
                                             error.ptr());
  py::register_exception<UnknownIdError>(m, "UnknownIdError", error.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
  py::register_exception<EstimationError>(m, "EstimationError", error.ptr());
  py::register_exception<StageError>(m, "StageError", error.ptr());

  // --- vocabulary and tokenisation ---

  py::class_<Merge>(m, "Merge")
      .def_readonly("left", &Merge::left)
      .def_readonly("right", &Merge::right)
      .def_readonly("result", &Merge::result)
      .def_readonly("rank", &Merge::rank)
      .def_readonly("score", &Merge::score);

  py::class_<RankedVocabulary, std::shared_ptr<RankedVocabulary>>(
      m, "RankedVocabulary")
      .def_property_readonly("max_rank", &RankedVocabulary::max_rank)
      .def_property_readonly("truncated", &RankedVocabulary::truncated)
      .def_property_readonly("pretokenise", &RankedVocabulary::pretokenise)
      .def_property_readonly("objective", [](const RankedVocabulary& v) {
        return std::string(to_string(v.objective()));
      })
      .def_property_readonly("alphabet", [](const RankedVocabulary& v) {
        const auto& s = v.alphabet().symbols();
        return py::bytes(std::string(s.begin(), s.end()));
      })
      .def("__len__", &RankedVocabulary::size)
      .def("merges", [](const RankedVocabulary& v) {
        return std::vector<Merge>(v.merges().begin(), v.merges().end());
      })
      .def("text", [](const RankedVocabulary& v, SubwordId id) {
        return as_bytes(v.text(id));
      })
      .def("find", [](const RankedVocabulary& v, const std::string& s) {
        return v.find(s);
      })
      .def("rank_of", &RankedVocabulary::rank_of)
      .def("id_for_rank", &RankedVocabulary::id_for_rank)
      .def("to_json", &vocabulary_to_json)
      .def_static("from_json", [](const std::string& text) {
        return std::make_shared<RankedVocabulary>(vocabulary_from_json(text));
      })
      .def("save", [](const RankedVocabulary& v, const std::string& path) {
        save_vocabulary(v, path);
      })
      .def_static("load", [](const std::string& path) {
        return std::make_shared<RankedVocabulary>(load_vocabulary(path));
      });

  m.def(
      "train_vocabulary",
      [](const std::vector<std::string>& corpus, std::size_t k_plus,
         const std::string& objective, bool pretokenise,
         const std::string& alphabet) {
        TrainOptions o;
        o.objective = parse_objective(objective);
        o.max_merges = k_plus;
        o.pretokenise = pretokenise;
        if (alphabet == "observed") {
          o.alphabet_mode = AlphabetMode::observed;
        } else if (alphabet == "bytes") {
          o.alphabet_mode = AlphabetMode::full_bytes;
        } else {
          throw InvalidArgument("alphabet must be 'observed' or 'bytes'");
        }
        return std::make_shared<RankedVocabulary>(
            train_ranked_vocab(corpus, o));
      },
      py::arg("corpus"), py::arg("k_plus"),
      py::arg("objective") = "bpe_count", py::arg("pretokenise") = true,
      py::arg("alphabet") = "observed",
      "Greedy merge training; objective is 'bpe_count' or 'wp_pmi'.");

  py::class_<Tokeniser>(m, "Tokeniser")
      .def(py::init([](std::shared_ptr<RankedVocabulary> v, std::size_t k,
                       const std::string& kind) {
             return Tokeniser(std::move(v), k, parse_tok_fn(kind));
           }),
           py::arg("vocab"), py::arg("cutoff"),
           py::arg("kind") = "merge_based")
      .def_property_readonly("cutoff", &Tokeniser::cutoff)
      .def_property_readonly("vocab_size", &Tokeniser::vocab_size)
      .def("tokenise",
           [](const Tokeniser& t, const std::string& s) {
             return t.tokenise(s);
           })
      .def("tokenise_corpus",
           [](const Tokeniser& t, const std::vector<std::string>& docs) {
             return tokenise_corpus(t, docs);
           })
      .def("detokenise",
           [](const Tokeniser& t, const std::vector<SubwordId>& ids) {
             return as_bytes(t.detokenise(ids));
           })
      .def("text", [](const Tokeniser& t, SubwordId id) {
        return as_bytes(t.text(id));
      });

  // --- language models ---

  py::class_<LanguageModel>(m, "LanguageModel")
      .def_property_readonly("vocab_size", &LanguageModel::vocab_size)
      .def_property_readonly("eos", &LanguageModel::eos)
      .def_property_readonly("kind", [](const LanguageModel& lm) {
        return std::string(to_string(lm.kind()));
      })
      .def("logprob",
           [](const LanguageModel& lm, const std::vector<SubwordId>& ctx,
              SubwordId next) { return lm.logprob(ctx, next); },
           py::arg("context"), py::arg("next"));
  py::class_<UniformModel, LanguageModel>(m, "UniformModel")
      .def(py::init<std::size_t>(), py::arg("vocab_size"));
  py::class_<NgramModel, LanguageModel>(m, "NgramModel")
      .def_property_readonly("order", &NgramModel::order)
      .def_property_readonly("alpha", &NgramModel::alpha);
  py::class_<PerfectOracleModel, LanguageModel>(m, "PerfectOracleModel");

  m.def(
      "train_ngram",
      [](const std::vector<std::vector<SubwordId>>& corpus,
         std::size_t vocab_size, std::size_t order, double alpha) {
        return train_ngram(corpus, vocab_size, order, alpha);
      },
      py::arg("token_corpus"), py::arg("vocab_size"), py::arg("order") = 3,
      py::arg("alpha") = 0.1);
  m.def(
      "perfect_oracle",
      [](const std::vector<std::pair<std::string, double>>& support,
         const Tokeniser& tok) {
        SyntheticLanguage lang{support};
        return perfect_oracle(lang, tok);
      },
      py::arg("support"), py::arg("tokeniser"),
      "Model of a finite language given as (string, probability) pairs.");

  // --- outcomes ---

  py::class_<CandidateSubword>(m, "CandidateSubword")
      .def_readonly("id", &CandidateSubword::id)
      .def_readonly("rank", &CandidateSubword::rank)
      .def_readonly("treated", &CandidateSubword::treated)
      .def_property_readonly("chars", [](const CandidateSubword& c) {
        return as_bytes(c.chars);
      });

  m.def("enumerate_candidates",
        [](const RankedVocabulary& v, std::size_t k, std::size_t w) {
          return enumerate_candidates(v, k, w);
        },
        py::arg("vocab"), py::arg("cutoff"), py::arg("window"));
  m.def("exclude_nested",
        [](const std::vector<CandidateSubword>& cands,
           const RankedVocabulary& v, std::size_t max_rank) {
          return exclude_nested(cands, v, max_rank);
        },
        py::arg("candidates"), py::arg("vocab"), py::arg("max_rank"));

  py::class_<OutcomeRecord>(m, "OutcomeRecord")
      .def_readonly("candidate", &OutcomeRecord::candidate)
      .def_readonly("n_samples", &OutcomeRecord::n_samples)
      .def_readonly("n_dropped_mismatch", &OutcomeRecord::n_dropped_mismatch)
      .def_readonly("mean", &OutcomeRecord::mean)
      .def_readonly("std", &OutcomeRecord::std)
      .def_readonly("median", &OutcomeRecord::median)
      .def_readonly("iqr", &OutcomeRecord::iqr);

  m.def(
      "collect_outcomes",
      [](const std::vector<std::string>& docs, const Tokeniser& tok,
         const LanguageModel& lm, const std::vector<CandidateSubword>& cands,
         std::size_t min_occurrences, bool include_doc_start,
         std::size_t threads) {
        OutcomeOptions o;
        o.min_occurrences = min_occurrences;
        o.include_doc_start = include_doc_start;
        o.threads = threads;
        py::gil_scoped_release release;
        return collect_outcomes(docs, tok, lm, cands, o).records;
      },
      py::arg("docs"), py::arg("tokeniser"), py::arg("model"),
      py::arg("candidates"), py::arg("min_occurrences") = 5,
      py::arg("include_doc_start") = true, py::arg("threads") = 1,
      "Per-candidate outcome records for candidates with enough samples.");
  m.def("outcomes_to_csv", [](const std::vector<OutcomeRecord>& r) {
    return outcomes_to_csv(r);
  });
  m.def("aggregate",
        [](const std::vector<double>& x, const std::string& stat) {
          return aggregate(x, parse_stat(stat));
        },
        py::arg("samples"), py::arg("stat") = "mean");

  // --- regression discontinuity ---

  py::class_<RDFit>(m, "RDFit")
      .def_readonly("tau_hat", &RDFit::tau_hat)
      .def_readonly("se_tau", &RDFit::se_tau)
      .def_readonly("alpha_hat", &RDFit::alpha_hat)
      .def_readonly("beta_hat", &RDFit::beta_hat)
      .def_readonly("n_treated", &RDFit::n_treated)
      .def_readonly("n_control", &RDFit::n_control)
      .def_readonly("cutoff", &RDFit::cutoff)
      .def_readonly("window", &RDFit::window)
      .def_readonly("coefficients", &RDFit::coefficients)
      .def("predict", &RDFit::predict, py::arg("rank"), py::arg("treated"))
      .def("to_json", &fit_report_json);

  auto options = [](const std::string& se, int degree, bool weighted) {
    RDOptions o;
    if (se == "classical") {
      o.se = StdErrorKind::classical;
    } else if (se == "hc1") {
      o.se = StdErrorKind::hc1;
    } else {
      throw InvalidArgument("se must be 'classical' or 'hc1'");
    }
    o.poly_degree = degree;
    o.weighted = weighted;
    return o;
  };

  m.def(
      "fit_rd",
      [options](const std::vector<double>& rank,
                const std::vector<bool>& treated, const std::vector<double>& y,
                std::size_t cutoff, std::size_t window,
                const std::vector<double>& weights, const std::string& se,
                int degree, bool weighted) {
        if (rank.size() != treated.size() || rank.size() != y.size() ||
            (!weights.empty() && weights.size() != y.size())) {
          throw InvalidArgument("rank, treated, y and weights differ in length");
        }
        RDDataset d;
        d.cutoff = cutoff;
        d.window = window;
        for (std::size_t i = 0; i < y.size(); ++i) {
          d.points.push_back(
              {rank[i], treated[i], y[i], weights.empty() ? 1.0 : weights[i]});
        }
        return fit_rd(d, options(se, degree, weighted));
      },
      py::arg("rank"), py::arg("treated"), py::arg("y"), py::arg("cutoff"),
      py::arg("window"), py::arg("weights") = std::vector<double>{},
      py::arg("se") = "classical", py::arg("poly_degree") = 1,
      py::arg("weighted") = false,
      "Fits y = f(r / 1000) + tau * W by least squares.");
  m.def(
      "fit_outcomes",
      [options](const std::vector<OutcomeRecord>& records, std::size_t cutoff,
                std::size_t window, const std::string& stat,
                const std::string& se, int degree, bool weighted) {
        return fit_rd(make_rd_dataset(records, cutoff, window, parse_stat(stat)),
                      options(se, degree, weighted));
      },
      py::arg("records"), py::arg("cutoff"), py::arg("window"),
      py::arg("stat") = "mean", py::arg("se") = "classical",
      py::arg("poly_degree") = 1, py::arg("weighted") = false);
  m.def("uniform_model_bound_check", &uniform_model_bound_check,
        py::arg("fit"), py::arg("outcome_space_size"),
        py::arg("tolerance") = 1e-6);

  // --- pipeline ---

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def("set", &PipelineConfig::set, py::arg("key"), py::arg("value"))
      .def("to_text", &PipelineConfig::to_text)
      .def_property_readonly("hash", &config_hash);
  m.def("parse_config", [](const std::string& t) { return parse_config(t); });
  m.def("load_config", &load_config);
  m.def("train_tokeniser", [](const PipelineConfig& c) {
    return summary_list(cmd_train_tokeniser(c));
  });
  m.def("tokenise_file",
        [](const PipelineConfig& c, const std::string& input, bool check) {
          return summary_list(cmd_tokenise(c, input, check));
        },
        py::arg("config"), py::arg("input"), py::arg("check_roundtrip") = false);
  m.def("collect", [](const PipelineConfig& c) {
    return summary_list(cmd_collect(c));
  });
  m.def("estimate", [](const PipelineConfig& c) {
    return summary_list(cmd_estimate(c));
  });
  m.def("sweep", [](const PipelineConfig& c) {
    return summary_list(cmd_sweep(c));
  });
}
