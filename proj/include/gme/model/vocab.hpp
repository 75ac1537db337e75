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

#ifndef GME_MODEL_VOCAB_HPP_
#define GME_MODEL_VOCAB_HPP_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "gme/common/text.hpp"

namespace gme::model {

// Segment kinds for token-type embeddings. The mask classifier's input
// deliberately has no persona segment.
enum class TokenType : int {
  kPersona = 0,
  kHistorySpeaker1 = 1,
  kHistorySpeaker2 = 2,
  kTemplate = 3,
  kResponse = 4,
};
inline constexpr int kNumTokenTypes = 5;

// Closed word-level vocabulary with reserved control tokens.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kSep = 2;
  static constexpr int kEos = 3;
  static constexpr int kMaskSpan = 4;
  static constexpr int kNumSpecials = 5;

  Vocabulary();
  // Builds from the given word lists, sorted and deduplicated.
  static Vocabulary build(const std::vector<Words>& sources);

  int id(const std::string& word) const;
  const std::string& word(int id) const;
  bool has(const std::string& word) const;
  int size() const { return static_cast<int>(words_.size()); }

  std::uint64_t hash() const;

  const std::vector<std::string>& words() const { return words_; }
  // Reconstruction from the full word list (specials included).
  static Vocabulary from_words(const std::vector<std::string>& words);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace gme::model

#endif  // GME_MODEL_VOCAB_HPP_
