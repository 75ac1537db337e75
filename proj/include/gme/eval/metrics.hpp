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

#ifndef GME_EVAL_METRICS_HPP_
#define GME_EVAL_METRICS_HPP_

#include <cstddef>
#include <vector>

#include "gme/common/text.hpp"

namespace gme::eval {

// Word-level Levenshtein distance with unit insert/delete/substitute costs.
std::size_t med(const Words& a, const Words& b);

struct BehavioralPair {
  Words original;                 // r^o
  Words edited;                   // r^e
  std::vector<Words> persona;     // p^e
};

struct BehavioralStats {
  double add = 0.0;         // mean words added (multiset difference)
  double rm = 0.0;          // mean words removed
  double delta_len = 0.0;   // mean length difference
  double med_to_original = 0.0;
  double med_to_persona = 0.0;
};

// Multiset-difference add/rm, length delta, and MED means over the pairs.
// d(r^e, p^e) compares against the concatenated persona sentences by default;
// min_over_persona_sentences switches to the minimum over sentences.
BehavioralStats behavioral_stats(const std::vector<BehavioralPair>& pairs,
                                 bool min_over_persona_sentences = false);

// Corpus-level BLEU-4 following the multi-bleu script: per-n-gram counts
// clipped at the max over references, brevity penalty from the closest
// reference length (shorter wins ties). Scale 0-100.
double multi_ref_bleu(const std::vector<Words>& predictions,
                      const std::vector<std::vector<Words>>& references);

// Max over references of the unigram bag-of-words F1.
double unigram_f1(const Words& prediction, const std::vector<Words>& references);

// (bleu + p_score) / 2
double average_score(double bleu, double p_score);

}  // namespace gme::eval

#endif  // GME_EVAL_METRICS_HPP_
