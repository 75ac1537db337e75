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

#ifndef GME_EVAL_REPORT_HPP_
#define GME_EVAL_REPORT_HPP_

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gme/corpus/types.hpp"
#include "gme/eval/lm_nll.hpp"
#include "gme/eval/metrics.hpp"
#include "gme/eval/pscore.hpp"

namespace gme::eval {

struct ScoreReport {
  std::optional<double> bleu;
  std::optional<double> p_score;
  std::optional<double> average;
  std::optional<double> f1;
  std::optional<double> nll;
  std::optional<BehavioralStats> behavioral;
  std::size_t entailment_count = 0;
  std::size_t neutral_count = 0;
  std::size_t contradiction_count = 0;
  std::size_t sample_count = 0;
  std::vector<double> per_sample_p_score;  // aligned with cases when NLI ran
};

struct EvaluateOptions {
  const nli::NliBackend* nli = nullptr;    // P-Score skipped when null
  const LmScorer* lm_scorer = nullptr;     // NLL skipped when null
  bool med_persona_min = false;
};

// Scores predictions against their edit cases. BLEU/F1 cover the cases that
// carry references; behavioral stats cover all cases; the average is present
// only when both of its terms are.
ScoreReport evaluate_predictions(const std::vector<corpus::EditCase>& cases,
                                 const std::vector<Words>& predictions,
                                 const EvaluateOptions& options);

nlohmann::json report_to_json(const ScoreReport& report);

// Per-metric mean and standard deviation over seed runs.
nlohmann::json aggregate_reports(const std::vector<ScoreReport>& reports);

// One-decimal rendering used in report summaries.
std::string format_score(double value);

}  // namespace gme::eval

#endif  // GME_EVAL_REPORT_HPP_
