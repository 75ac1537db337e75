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

#ifndef GME_CORPUS_TYPES_HPP_
#define GME_CORPUS_TYPES_HPP_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "gme/common/text.hpp"

namespace gme::corpus {

enum class Speaker { kSpeaker1, kSpeaker2 };

inline Speaker other(Speaker s) {
  return s == Speaker::kSpeaker1 ? Speaker::kSpeaker2 : Speaker::kSpeaker1;
}

std::string speaker_tag(Speaker s);            // "s1" / "s2"
Speaker parse_speaker(const std::string& tag); // throws SchemaError

struct DialogueTurn {
  Speaker speaker = Speaker::kSpeaker1;
  Words text;
};

// A (history, response, persona) training triple.
struct DialogueSample {
  std::vector<DialogueTurn> history;
  Words response;
  std::vector<Words> persona;
};

// An inference-time editing task, optionally with reference edits.
struct EditCase {
  std::vector<DialogueTurn> history;
  Words original_response;
  std::vector<Words> editing_persona;
  std::vector<Words> references;
};

// The speaker who produces the response: the one whose turn comes after the
// last history turn. Empty histories default to speaker 2, who responds to
// the opening turn by convention.
Speaker responder(const std::vector<DialogueTurn>& history);

struct CorpusStats {
  std::size_t sample_count = 0;
  std::map<std::size_t, std::size_t> persona_sentence_histogram;
};

CorpusStats compute_stats(const std::vector<DialogueSample>& samples);
CorpusStats compute_case_stats(const std::vector<EditCase>& cases);

bool operator==(const DialogueTurn& a, const DialogueTurn& b);
bool operator==(const DialogueSample& a, const DialogueSample& b);
bool operator==(const EditCase& a, const EditCase& b);

}  // namespace gme::corpus

#endif  // GME_CORPUS_TYPES_HPP_
