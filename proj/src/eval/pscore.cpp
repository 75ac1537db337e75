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

#include "gme/eval/pscore.hpp"

#include "gme/common/error.hpp"

namespace gme::eval {

PScoreResult p_score(const std::vector<Words>& responses,
                     const std::vector<std::vector<Words>>& personas,
                     const nli::NliBackend& nli) {
  if (responses.size() != personas.size()) {
    throw PreconditionError("p_score: responses and personas misaligned");
  }
  if (responses.empty()) throw PreconditionError("p_score: empty sample list");

  PScoreResult result;
  result.per_sample.reserve(responses.size());
  double total = 0.0;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    double sum = 0.0;
    for (const auto& sentence : personas[i]) {
      nli::NliLabel label = nli.classify(responses[i], sentence);
      sum += nli::map_label(label);
      switch (label) {
        case nli::NliLabel::kEntailment:
          ++result.entailment_count;
          break;
        case nli::NliLabel::kNeutral:
          ++result.neutral_count;
          break;
        case nli::NliLabel::kContradiction:
          ++result.contradiction_count;
          break;
      }
    }
    result.per_sample.push_back(sum);
    total += sum;
  }
  result.mean = total / static_cast<double>(responses.size());
  return result;
}

}  // namespace gme::eval
