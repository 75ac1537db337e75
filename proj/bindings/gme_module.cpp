// Copyright 2026 The GME Authors.
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

#include "gme/common/error.hpp"
#include "gme/corpus/synthetic.hpp"
#include "gme/editor/editor.hpp"
#include "gme/eval/metrics.hpp"
#include "gme/eval/pscore.hpp"
#include "gme/maskgen/maskgen.hpp"
#include "gme/nli/nli.hpp"
#include "gme/recombiner/recombiner.hpp"
#include "gme/templating/ops.hpp"
#include "gme/templating/stopwords.hpp"

namespace py = pybind11;
using namespace gme;

namespace {

std::vector<Words> split_sentences(const std::vector<std::string>& sentences) {
  std::vector<Words> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(split_words(s));
  return out;
}

std::vector<corpus::DialogueTurn> parse_history(
    const std::vector<std::pair<std::string, std::string>>& turns) {
  std::vector<corpus::DialogueTurn> history;
  for (const auto& [speaker, text] : turns) {
    history.push_back({corpus::parse_speaker(speaker), split_words(text)});
  }
  return history;
}

templating::IndexSet to_index_set(const std::set<std::size_t>& s) {
  return templating::IndexSet(s.begin(), s.end());
}

// Loads the mask generator and recombiner checkpoints of a training run and
// edits responses with them.
class PyEditor {
 public:
  PyEditor(const std::string& maskgen_dir, const std::string& recombiner_dir,
           double epsilon, int max_decode_length)
      : tagger_(maskgen::MaskTagger::load(maskgen_dir)),
        recombiner_(model::SequenceModel::load(recombiner_dir, recombiner::kCheckpointKind)),
        options_{epsilon, max_decode_length} {}

  py::dict edit(const std::vector<std::pair<std::string, std::string>>& history,
                const std::string& original_response,
                const std::vector<std::string>& editing_persona) const {
    auto result = editor::edit(parse_history(history), split_words(original_response),
                               split_sentences(editing_persona), *tagger_, *recombiner_,
                               options_);
    py::dict out;
    out["edited_response"] = join_words(result.edited_response);
    out["template"] = result.tmpl.render();
    out["confidences"] = result.mask_decision.confidences;
    out["truncated"] = result.truncated;
    return out;
  }

 private:
  std::unique_ptr<maskgen::MaskTagger> tagger_;
  std::unique_ptr<model::SequenceModel> recombiner_;
  editor::EditorOptions options_;
};

}  // namespace

PYBIND11_MODULE(gme, m) {
  m.doc() = "Grounded minimal editing of persona-grounded dialogue responses";

  py::register_exception<gme::Error>(m, "GmeError");

  // Metrics.
  m.def("med",
        [](const std::string& a, const std::string& b) {
          return eval::med(split_words(a), split_words(b));
        },
        py::arg("a"), py::arg("b"), "Word-level Levenshtein distance");
  m.def("multi_ref_bleu",
        [](const std::vector<std::string>& predictions,
           const std::vector<std::vector<std::string>>& references) {
          std::vector<Words> preds;
          for (const auto& p : predictions) preds.push_back(split_words(p));
          std::vector<std::vector<Words>> refs;
          for (const auto& r : references) refs.push_back(split_sentences(r));
          return eval::multi_ref_bleu(preds, refs);
        },
        py::arg("predictions"), py::arg("references"),
        "Corpus BLEU-4 with the multi-reference clipping convention, 0-100");
  m.def("unigram_f1",
        [](const std::string& prediction, const std::vector<std::string>& references) {
          return eval::unigram_f1(split_words(prediction), split_sentences(references));
        },
        py::arg("prediction"), py::arg("references"));
  m.def("average_score", &eval::average_score, py::arg("bleu"), py::arg("p_score"));
  m.def("behavioral_stats",
        [](const std::vector<std::tuple<std::string, std::string, std::vector<std::string>>>&
               rows,
           bool min_over_persona_sentences) {
          std::vector<eval::BehavioralPair> pairs;
          for (const auto& [original, edited, persona] : rows) {
            pairs.push_back(
                {split_words(original), split_words(edited), split_sentences(persona)});
          }
          auto stats = eval::behavioral_stats(pairs, min_over_persona_sentences);
          py::dict out;
          out["add"] = stats.add;
          out["rm"] = stats.rm;
          out["delta_len"] = stats.delta_len;
          out["med_to_original"] = stats.med_to_original;
          out["med_to_persona"] = stats.med_to_persona;
          return out;
        },
        py::arg("rows"), py::arg("min_over_persona_sentences") = false,
        "Rows are (original, edited, persona_sentences) triples");

  // Template construction.
  m.def("rule_lemma", &templating::rule_lemma, py::arg("word"));
  m.def("overlap_set",
        [](const std::string& response, const std::vector<std::string>& persona) {
          auto s = templating::overlap_set(split_words(response), split_sentences(persona));
          return std::set<std::size_t>(s.begin(), s.end());
        },
        py::arg("response"), py::arg("persona"));
  m.def("stopword_set",
        [](const std::string& response) {
          auto s = templating::stopword_set(split_words(response),
                                            templating::english_stopwords());
          return std::set<std::size_t>(s.begin(), s.end());
        },
        py::arg("response"));
  m.def("target_mask_vector",
        [](const std::string& response, const std::set<std::size_t>& gradient,
           const std::set<std::size_t>& overlap, const std::set<std::size_t>& stopwords) {
          auto mask = templating::target_mask_vector(split_words(response),
                                                     to_index_set(gradient),
                                                     to_index_set(overlap),
                                                     to_index_set(stopwords));
          return std::vector<int>(mask.labels.begin(), mask.labels.end());
        },
        py::arg("response"), py::arg("gradient"), py::arg("overlap"), py::arg("stopwords"));
  m.def("merge_spans",
        [](const std::vector<int>& labels) {
          templating::TokenMaskVector v;
          for (int l : labels) v.labels.push_back(l ? 1 : 0);
          return templating::merge_spans(v);
        },
        py::arg("labels"));
  m.def("keep_count_distribution", &templating::keep_count_distribution,
        py::arg("persona_related_sentences"), py::arg("tau"));
  m.def("build_inference_template",
        [](const std::string& response, const std::vector<double>& confidences,
           const std::vector<std::string>& editing_persona,
           const std::vector<std::pair<std::string, std::string>>& history, double epsilon) {
          templating::TokenMaskVector decisions;
          decisions.labels.assign(confidences.size(), 0);
          decisions.confidences = confidences;
          auto tmpl = templating::build_inference_template(
              split_words(response), decisions, split_sentences(editing_persona),
              parse_history(history), epsilon);
          return tmpl.render();
        },
        py::arg("response"), py::arg("confidences"), py::arg("editing_persona"),
        py::arg("history"), py::arg("epsilon") = templating::kEpsilonMain);
  m.attr("EPSILON_MAIN") = templating::kEpsilonMain;
  m.attr("EPSILON_TRANSFER") = templating::kEpsilonTransfer;
  m.attr("MASK_SPAN_TOKEN") = templating::kMaskSpanToken;

  // NLI.
  py::class_<nli::RuleOracle>(m, "RuleOracle")
      .def(py::init([](const std::string& lexicon_path) {
             return nli::RuleOracle(nli::SlotLexicon::load(lexicon_path));
           }),
           py::arg("lexicon_path"))
      .def("classify",
           [](const nli::RuleOracle& oracle, const std::string& premise,
              const std::string& hypothesis) {
             return nli::label_name(
                 oracle.classify(split_words(premise), split_words(hypothesis)));
           },
           py::arg("premise"), py::arg("hypothesis"));
  m.def("map_label",
        [](const std::string& label) { return nli::map_label(nli::parse_label(label)); },
        py::arg("label"));

  // Synthetic corpus.
  m.def("generate_synthetic_corpus",
        [](std::uint64_t seed, std::size_t train, std::size_t valid, std::size_t test,
           const std::string& out_dir, double leak_rate) {
          auto synthetic = corpus::generate_synthetic_corpus(seed, {train, valid, test},
                                                             leak_rate);
          auto paths = corpus::write_synthetic_corpus(synthetic, out_dir);
          py::dict out;
          out["train"] = paths.train;
          out["valid"] = paths.valid;
          out["valid_cases"] = paths.valid_cases;
          out["test_cases"] = paths.test_cases;
          out["lexicon"] = paths.lexicon;
          return out;
        },
        py::arg("seed"), py::arg("train"), py::arg("valid"), py::arg("test"),
        py::arg("out_dir"), py::arg("leak_rate") = 0.02);

  // Editing with trained checkpoints.
  py::class_<PyEditor>(m, "Editor")
      .def(py::init<const std::string&, const std::string&, double, int>(),
           py::arg("maskgen_dir"), py::arg("recombiner_dir"),
           py::arg("epsilon") = templating::kEpsilonMain,
           py::arg("max_decode_length") = 64)
      .def("edit", &PyEditor::edit, py::arg("history"), py::arg("original_response"),
           py::arg("editing_persona"));
}
