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

#ifndef GME_CORPUS_SYNTHETIC_HPP_
#define GME_CORPUS_SYNTHETIC_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "gme/corpus/types.hpp"
#include "gme/nli/lexicon.hpp"

namespace gme::corpus {

// The built-in slot grammar: persona sentences of the forms
// "i like/hate <topic>", "i own <item>", "i work as <job>" over a fixed
// vocabulary of 54 slot values. like/hate oppose each other; work is an
// exclusive predicate.
nli::SlotLexicon builtin_lexicon();

struct SyntheticSizes {
  std::size_t train = 2000;
  std::size_t valid = 200;
  std::size_t test = 500;  // edit cases
};

struct SyntheticCorpus {
  std::vector<DialogueSample> train;
  std::vector<DialogueSample> valid;
  std::vector<EditCase> valid_cases;
  std::vector<EditCase> test_cases;
  nli::SlotLexicon lexicon;
};

// Deterministic given the seed. Edit cases carry contradicting editing
// personas with three rule-edited references; the editing-persona sentences
// are avoided in training personas except for a small deliberate leak_rate
// that the leakage filter is expected to remove downstream.
SyntheticCorpus generate_synthetic_corpus(std::uint64_t grammar_seed, SyntheticSizes sizes,
                                          double leak_rate = 0.02);

struct SyntheticPaths {
  std::string train;
  std::string valid;
  std::string valid_cases;
  std::string test_cases;
  std::string lexicon;
};

// Writes train/valid/valid_cases/test_cases/lexicon files under dir.
SyntheticPaths write_synthetic_corpus(const SyntheticCorpus& corpus, const std::string& dir);

}  // namespace gme::corpus

#endif  // GME_CORPUS_SYNTHETIC_HPP_
