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

#ifndef GME_EVAL_PSCORE_HPP_
#define GME_EVAL_PSCORE_HPP_

#include <cstddef>
#include <vector>

#include "gme/common/text.hpp"
#include "gme/nli/nli.hpp"

namespace gme::eval {

struct PScoreResult {
  // Mean over samples of the mapped label sums, on the raw +-0.5-per-sentence
  // scale. Score reports multiply by 100 so the value shares the BLEU range.
  double mean = 0.0;
  std::vector<double> per_sample;
  std::size_t entailment_count = 0;  // label distribution over all (r, p_j) pairs
  std::size_t neutral_count = 0;
  std::size_t contradiction_count = 0;
};

// Per sample: sum over persona sentences of map[C(response, p_j)], with the
// response as premise. Reports the sample mean and the label distribution.
PScoreResult p_score(const std::vector<Words>& responses,
                     const std::vector<std::vector<Words>>& personas,
                     const nli::NliBackend& nli);

}  // namespace gme::eval

#endif  // GME_EVAL_PSCORE_HPP_
