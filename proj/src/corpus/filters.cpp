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

#include "gme/corpus/filters.hpp"

#include "gme/common/error.hpp"

namespace gme::corpus {

std::set<std::string> editing_persona_set(const std::vector<EditCase>& cases) {
  std::set<std::string> out;
  for (const auto& c : cases) {
    for (const auto& sentence : c.editing_persona) {
      out.insert(normalize_persona_sentence(sentence));
    }
  }
  return out;
}

LeakageFilterResult filter_persona_leakage(const std::vector<DialogueSample>& train,
                                           const std::set<std::string>& editing_personas) {
  LeakageFilterResult result;
  result.retained.reserve(train.size());
  for (const auto& sample : train) {
    bool leaked = false;
    for (const auto& sentence : sample.persona) {
      if (editing_personas.count(normalize_persona_sentence(sentence))) {
        leaked = true;
        break;
      }
    }
    if (leaked) {
      ++result.dropped;
    } else {
      result.retained.push_back(sample);
    }
  }
  return result;
}

namespace {

nli::NliLabel classify_or_abort(const nli::NliBackend& nli, const Words& premise,
                                const Words& hypothesis) {
  try {
    return nli.classify(premise, hypothesis);
  } catch (const BackendError& e) {
    throw BackendError(std::string("nli backend failed on pair (\"") + join_words(premise) +
                       "\", \"" + join_words(hypothesis) + "\"): " + e.what());
  }
}

}  // namespace

std::vector<EditCase> select_editing_personas(const std::vector<CaseSeed>& cases,
                                              const std::vector<std::vector<Words>>& persona_pool,
                                              const nli::NliBackend& nli) {
  std::vector<EditCase> selected;
  for (const auto& seed : cases) {
    Speaker self = responder(seed.history);
    for (const auto& profile : persona_pool) {
      if (profile.empty()) continue;

      // (a) editing difficulty: some sentence contradicts the response.
      bool contradicts_response = false;
      for (const auto& sentence : profile) {
        if (classify_or_abort(nli, seed.original_response, sentence) ==
            nli::NliLabel::kContradiction) {
          contradicts_response = true;
          break;
        }
      }
      if (!contradicts_response) continue;

      // (b) conversation consistency: no sentence contradicts a turn the
      // responder spoke.
      bool contradicts_history = false;
      for (const auto& sentence : profile) {
        for (const auto& turn : seed.history) {
          if (turn.speaker != self) continue;
          if (classify_or_abort(nli, turn.text, sentence) == nli::NliLabel::kContradiction) {
            contradicts_history = true;
            break;
          }
        }
        if (contradicts_history) break;
      }
      if (contradicts_history) continue;

      // (c) internal consistency, checked in both directions.
      bool self_contradiction = false;
      for (std::size_t i = 0; i < profile.size() && !self_contradiction; ++i) {
        for (std::size_t j = 0; j < profile.size(); ++j) {
          if (i == j) continue;
          if (classify_or_abort(nli, profile[i], profile[j]) ==
              nli::NliLabel::kContradiction) {
            self_contradiction = true;
            break;
          }
        }
      }
      if (self_contradiction) continue;

      EditCase c;
      c.history = seed.history;
      c.original_response = seed.original_response;
      c.editing_persona = profile;
      selected.push_back(std::move(c));
    }
  }
  return selected;
}

}  // namespace gme::corpus
