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

#ifndef GME_NLI_LEXICON_HPP_
#define GME_NLI_LEXICON_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gme/common/text.hpp"

namespace gme::nli {

// A predicate of the closed slot grammar. Sentences have the canonical shape
// "i <phrase> <value>" where <value> is drawn from the predicate's category.
struct SlotPredicate {
  std::string name;            // e.g. "like"
  Words phrase;                // e.g. {"work", "as"}
  std::string category;        // slot category the values come from
  bool exclusive = false;      // a speaker realizes at most one value
  std::string opposing;        // name of the opposing predicate, or empty
};

struct SlotCategory {
  std::string name;
  std::vector<std::string> values;  // single lowercase words
};

// A realized (predicate, value) pair found in a word sequence.
struct Realization {
  std::size_t predicate_index = 0;
  std::string value;
  std::size_t start = 0;  // index of the "i" opening the phrase
};

// The closed grammar the synthetic corpus is drawn from. The rule-based NLI
// oracle is exact on word sequences composed from this lexicon.
class SlotLexicon {
 public:
  SlotLexicon() = default;
  SlotLexicon(std::vector<SlotPredicate> predicates, std::vector<SlotCategory> categories);

  const std::vector<SlotPredicate>& predicates() const { return predicates_; }
  const std::vector<SlotCategory>& categories() const { return categories_; }

  const SlotCategory& category(const std::string& name) const;
  std::optional<std::size_t> predicate_index(const std::string& name) const;
  bool is_value_of(const std::string& category, const std::string& word) const;

  // All slot values across categories, in lexicon order.
  std::vector<std::string> all_values() const;

  // Scans for contiguous "i <phrase> <value>" realizations.
  std::vector<Realization> find_realizations(const Words& words) const;

  // Parses a whole persona sentence; trailing punctuation words are ignored.
  // Returns nullopt when the sentence is not a canonical realization.
  std::optional<Realization> parse_persona_sentence(const Words& sentence) const;

  Words render_sentence(std::size_t predicate_index, const std::string& value,
                        bool terminal_period) const;

  void save(const std::string& path) const;
  static SlotLexicon load(const std::string& path);

 private:
  std::vector<SlotPredicate> predicates_;
  std::vector<SlotCategory> categories_;
};

}  // namespace gme::nli

#endif  // GME_NLI_LEXICON_HPP_
