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

#ifndef GME_EVAL_LM_NLL_HPP_
#define GME_EVAL_LM_NLL_HPP_

#include <string>
#include <utility>
#include <vector>

#include "gme/common/text.hpp"

namespace gme::eval {

// External language-model scoring interface: per response, the total log
// probability and the word count it covers.
class LmScorer {
 public:
  virtual ~LmScorer() = default;
  virtual std::vector<std::pair<double, std::size_t>> score(
      const std::vector<Words>& responses) const = 0;
};

// Process-boundary scorer. Requests are plain response-text lines; each reply
// line is "total_logprob<TAB>word_count".
class ExternalLmScorer : public LmScorer {
 public:
  explicit ExternalLmScorer(std::string command) : command_(std::move(command)) {}
  std::vector<std::pair<double, std::size_t>> score(
      const std::vector<Words>& responses) const override;

 private:
  std::string command_;
};

// Mean word-level negative log-likelihood: (-sum log p) / (sum word counts).
double external_lm_nll(const std::vector<Words>& responses, const LmScorer& scorer);

}  // namespace gme::eval

#endif  // GME_EVAL_LM_NLL_HPP_
