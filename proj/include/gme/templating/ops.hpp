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

#ifndef GME_TEMPLATING_OPS_HPP_
#define GME_TEMPLATING_OPS_HPP_

#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gme/common/rng.hpp"
#include "gme/common/text.hpp"
#include "gme/corpus/types.hpp"
#include "gme/templating/template.hpp"

namespace gme::templating {

using IndexSet = std::set<std::size_t>;
using Lemmatizer = std::function<std::string(const std::string&)>;

// Suffix-stripping lemmatizer good enough for word-overlap matching:
// drops one inflectional suffix (ing/ed/es/s/d) and a trailing "e".
std::string rule_lemma(const std::string& word);

// Indices of response words whose lemma occurs among the persona word lemmas.
IndexSet overlap_set(const Words& response, const std::vector<Words>& persona,
                     const Lemmatizer& lemmatize = rule_lemma);

// Indices of response words in the stoplist or made of punctuation only.
IndexSet stopword_set(const Words& response, const std::set<std::string>& stoplist);

// m_i = 1 iff i in (gradient OR overlap) AND NOT stopwords.
TokenMaskVector target_mask_vector(const Words& response, const IndexSet& gradient_indices,
                                   const IndexSet& overlap_indices,
                                   const IndexSet& stopword_indices);

// Maximal runs of consecutive 1-labels as sorted half-open spans.
std::vector<std::pair<std::size_t, std::size_t>> merge_spans(const TokenMaskVector& labels);

// Keep-count distribution for sentence deletion: P(n) proportional to
// exp(-n / tau) over n = 0 .. l-1. Exposed for tests.
std::vector<double> keep_count_distribution(std::size_t l, double tau);

// Training template: persona-related sentences (those with a masked token)
// are partially deleted with keep count n ~ P(n); kept ones get extra
// per-word noise masks; consecutive masks merge into span placeholders.
Template sample_training_template(const Words& response, const TokenMaskVector& mask,
                                  const TemplateSamplerConfig& config, Rng& rng);

// Inference template: word i is masked iff its confidence exceeds epsilon and
// the word occurs neither in the editing persona nor in the history. No
// sentence deletion at inference.
Template build_inference_template(const Words& original_response,
                                  const TokenMaskVector& decisions,
                                  const std::vector<Words>& editing_persona,
                                  const std::vector<corpus::DialogueTurn>& history,
                                  double epsilon);

}  // namespace gme::templating

#endif  // GME_TEMPLATING_OPS_HPP_
