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

#include "gme/eval/report.hpp"

#include <cmath>
#include <cstdio>

#include "gme/common/error.hpp"

namespace gme::eval {

ScoreReport evaluate_predictions(const std::vector<corpus::EditCase>& cases,
                                 const std::vector<Words>& predictions,
                                 const EvaluateOptions& options) {
  if (cases.size() != predictions.size()) {
    throw PreconditionError("evaluate: cases and predictions misaligned (" +
                            std::to_string(cases.size()) + " vs " +
                            std::to_string(predictions.size()) + ")");
  }
  ScoreReport report;
  report.sample_count = cases.size();
  if (cases.empty()) return report;

  std::vector<Words> referenced_preds;
  std::vector<std::vector<Words>> reference_sets;
  double f1_sum = 0.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (cases[i].references.empty()) continue;
    referenced_preds.push_back(predictions[i]);
    reference_sets.push_back(cases[i].references);
    f1_sum += unigram_f1(predictions[i], cases[i].references);
  }
  if (!referenced_preds.empty()) {
    report.bleu = multi_ref_bleu(referenced_preds, reference_sets);
    report.f1 = f1_sum / static_cast<double>(referenced_preds.size());
  }

  if (options.nli) {
    std::vector<Words> responses = predictions;
    std::vector<std::vector<Words>> personas;
    personas.reserve(cases.size());
    for (const auto& c : cases) personas.push_back(c.editing_persona);
    PScoreResult ps = p_score(responses, personas, *options.nli);
    // Reported on the x100 scale so it shares the BLEU range; the raw
    // per-sample sums stay on the +-0.5-per-sentence scale.
    report.p_score = 100.0 * ps.mean;
    report.entailment_count = ps.entailment_count;
    report.neutral_count = ps.neutral_count;
    report.contradiction_count = ps.contradiction_count;
    report.per_sample_p_score = std::move(ps.per_sample);
  }

  if (report.bleu && report.p_score) {
    report.average = average_score(*report.bleu, *report.p_score);
  }

  std::vector<BehavioralPair> pairs;
  pairs.reserve(cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    pairs.push_back({cases[i].original_response, predictions[i], cases[i].editing_persona});
  }
  report.behavioral = behavioral_stats(pairs, options.med_persona_min);

  if (options.lm_scorer) {
    report.nll = external_lm_nll(predictions, *options.lm_scorer);
  }
  return report;
}

namespace {
void put_optional(nlohmann::json& j, const char* key, const std::optional<double>& v) {
  if (v) j[key] = *v;
}
}  // namespace

nlohmann::json report_to_json(const ScoreReport& report) {
  nlohmann::json j;
  j["sample_count"] = report.sample_count;
  put_optional(j, "bleu", report.bleu);
  put_optional(j, "p_score", report.p_score);
  put_optional(j, "average", report.average);
  put_optional(j, "f1", report.f1);
  put_optional(j, "nll", report.nll);
  if (report.behavioral) {
    j["behavioral"] = {{"add", report.behavioral->add},
                       {"rm", report.behavioral->rm},
                       {"delta_len", report.behavioral->delta_len},
                       {"med_to_original", report.behavioral->med_to_original},
                       {"med_to_persona", report.behavioral->med_to_persona}};
  }
  j["label_distribution"] = {{"entailment", report.entailment_count},
                             {"neutral", report.neutral_count},
                             {"contradiction", report.contradiction_count}};
  return j;
}

nlohmann::json aggregate_reports(const std::vector<ScoreReport>& reports) {
  if (reports.empty()) throw PreconditionError("no reports to aggregate");
  auto stats = [&](auto getter) -> nlohmann::json {
    std::vector<double> values;
    for (const auto& r : reports) {
      auto v = getter(r);
      if (v) values.push_back(*v);
    }
    if (values.empty()) return nullptr;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    return {{"mean", mean}, {"stddev", std::sqrt(var)}, {"n", values.size()}};
  };

  nlohmann::json j;
  j["seeds"] = reports.size();
  j["bleu"] = stats([](const ScoreReport& r) { return r.bleu; });
  j["p_score"] = stats([](const ScoreReport& r) { return r.p_score; });
  j["average"] = stats([](const ScoreReport& r) { return r.average; });
  j["f1"] = stats([](const ScoreReport& r) { return r.f1; });
  j["nll"] = stats([](const ScoreReport& r) { return r.nll; });
  return j;
}

std::string format_score(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", value);
  return buf;
}

}  // namespace gme::eval
