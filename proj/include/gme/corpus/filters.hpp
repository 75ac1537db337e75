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

#ifndef GME_CORPUS_FILTERS_HPP_
#define GME_CORPUS_FILTERS_HPP_

#include <set>
#include <string>
#include <vector>

#include "gme/corpus/types.hpp"
#include "gme/nli/nli.hpp"

namespace gme::corpus {

// Normalized persona sentences of a case set; the leakage filter's key set.
std::set<std::string> editing_persona_set(const std::vector<EditCase>& cases);

struct LeakageFilterResult {
  std::vector<DialogueSample> retained;
  std::size_t dropped = 0;
};

// Drops every training sample with a persona sentence whose normalized form
// equals one of the editing-persona sentences.
LeakageFilterResult filter_persona_leakage(const std::vector<DialogueSample>& train,
                                           const std::set<std::string>& editing_personas);

// A (history, original response) pair awaiting an editing persona.
struct CaseSeed {
  std::vector<DialogueTurn> history;
  Words original_response;
};

// Pairs every seed with every pool profile that (a) contradicts the original
// response through at least one sentence, (b) never contradicts a turn spoken
// by the responder, and (c) is internally consistent. One EditCase per
// qualifying pair, ordered by (seed, profile). Seeds with no qualifying
// profile are omitted.
std::vector<EditCase> select_editing_personas(const std::vector<CaseSeed>& cases,
                                              const std::vector<std::vector<Words>>& persona_pool,
                                              const nli::NliBackend& nli);

}  // namespace gme::corpus

#endif  // GME_CORPUS_FILTERS_HPP_
