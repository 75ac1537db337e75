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

#include "gme/corpus/types.hpp"

#include "gme/common/error.hpp"

namespace gme::corpus {

std::string speaker_tag(Speaker s) {
  return s == Speaker::kSpeaker1 ? "s1" : "s2";
}

Speaker parse_speaker(const std::string& tag) {
  if (tag == "s1") return Speaker::kSpeaker1;
  if (tag == "s2") return Speaker::kSpeaker2;
  throw SchemaError("unknown speaker tag: \"" + tag + "\"");
}

Speaker responder(const std::vector<DialogueTurn>& history) {
  if (history.empty()) return Speaker::kSpeaker2;
  return other(history.back().speaker);
}

CorpusStats compute_stats(const std::vector<DialogueSample>& samples) {
  CorpusStats stats;
  stats.sample_count = samples.size();
  for (const auto& s : samples) {
    stats.persona_sentence_histogram[s.persona.size()] += 1;
  }
  return stats;
}

CorpusStats compute_case_stats(const std::vector<EditCase>& cases) {
  CorpusStats stats;
  stats.sample_count = cases.size();
  for (const auto& c : cases) {
    stats.persona_sentence_histogram[c.editing_persona.size()] += 1;
  }
  return stats;
}

bool operator==(const DialogueTurn& a, const DialogueTurn& b) {
  return a.speaker == b.speaker && a.text == b.text;
}

bool operator==(const DialogueSample& a, const DialogueSample& b) {
  return a.history == b.history && a.response == b.response && a.persona == b.persona;
}

bool operator==(const EditCase& a, const EditCase& b) {
  return a.history == b.history && a.original_response == b.original_response &&
         a.editing_persona == b.editing_persona && a.references == b.references;
}

}  // namespace gme::corpus
