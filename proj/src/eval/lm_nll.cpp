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

#include "gme/eval/lm_nll.hpp"

#include <cstdlib>

#include "gme/common/error.hpp"
#include "gme/common/subprocess.hpp"

namespace gme::eval {

std::vector<std::pair<double, std::size_t>> ExternalLmScorer::score(
    const std::vector<Words>& responses) const {
  std::vector<std::string> requests;
  requests.reserve(responses.size());
  for (const auto& r : responses) requests.push_back(join_words(r));
  auto replies = run_line_protocol(command_, requests);
  std::vector<std::pair<double, std::size_t>> out;
  out.reserve(replies.size());
  for (const auto& line : replies) {
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw BackendError("lm scorer reply missing tab separator: \"" + line + "\"");
    }
    char* end = nullptr;
    double logprob = std::strtod(line.c_str(), &end);
    long count = std::strtol(line.c_str() + tab + 1, nullptr, 10);
    if (end == line.c_str() || count <= 0) {
      throw BackendError("unparseable lm scorer reply: \"" + line + "\"");
    }
    out.emplace_back(logprob, static_cast<std::size_t>(count));
  }
  return out;
}

double external_lm_nll(const std::vector<Words>& responses, const LmScorer& scorer) {
  if (responses.empty()) throw PreconditionError("external_lm_nll: empty response list");
  auto scores = scorer.score(responses);
  if (scores.size() != responses.size()) {
    throw BackendError("lm scorer returned a misaligned batch");
  }
  double total_logprob = 0.0;
  double total_words = 0.0;
  for (const auto& [logprob, count] : scores) {
    total_logprob += logprob;
    total_words += static_cast<double>(count);
  }
  if (total_words <= 0.0) throw BackendError("lm scorer reported zero words");
  return -total_logprob / total_words;
}

}  // namespace gme::eval
