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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>

#include "gme/common/error.hpp"
#include "gme/common/rng.hpp"
#include "gme/corpus/synthetic.hpp"
#include "gme/nli/nli.hpp"

using namespace gme;
using namespace gme::nli;

namespace {

const SlotLexicon& lexicon() {
  static SlotLexicon lex = corpus::builtin_lexicon();
  return lex;
}

// Independent oracle: enumerate the full (predicate, value) table and decide
// with substring checks on padded strings.
NliLabel table_lookup_oracle(const Words& premise, const Words& hypothesis) {
  const auto& lex = lexicon();
  std::string padded = " " + join_words(premise) + " ";

  auto realized = [&](const std::string& pred_name, const std::string& value) {
    for (const auto& p : lex.predicates()) {
      if (p.name != pred_name) continue;
      std::string pattern = " i " + join_words(p.phrase) + " " + value + " ";
      return padded.find(pattern) != std::string::npos;
    }
    return false;
  };

  auto parsed = lex.parse_persona_sentence(hypothesis);
  if (!parsed) return NliLabel::kNeutral;
  const auto& hyp_pred = lex.predicates()[parsed->predicate_index];

  if (realized(hyp_pred.name, parsed->value)) return NliLabel::kEntailment;
  if (!hyp_pred.opposing.empty() && realized(hyp_pred.opposing, parsed->value)) {
    return NliLabel::kContradiction;
  }
  if (hyp_pred.exclusive) {
    for (const auto& value : lex.category(hyp_pred.category).values) {
      if (value != parsed->value && realized(hyp_pred.name, value)) {
        return NliLabel::kContradiction;
      }
    }
  }
  return NliLabel::kNeutral;
}

Words random_premise(Rng& rng, bool include_realization) {
  static const std::vector<std::string> filler = {"the", "weather", "is", "nice",
                                                  "today", "my", "friend", "came"};
  Words out;
  std::size_t pre = rng.below(4);
  for (std::size_t i = 0; i < pre; ++i) out.push_back(filler[rng.below(filler.size())]);
  if (include_realization) {
    const auto& lex = lexicon();
    std::size_t pred = rng.below(lex.predicates().size());
    const auto& cat = lex.category(lex.predicates()[pred].category);
    Words r = lex.render_sentence(pred, cat.values[rng.below(cat.values.size())],
                                  rng.bernoulli(0.5));
    out.insert(out.end(), r.begin(), r.end());
  }
  std::size_t post = rng.below(4);
  for (std::size_t i = 0; i < post; ++i) out.push_back(filler[rng.below(filler.size())]);
  if (out.empty()) out.push_back("hello");
  return out;
}

}  // namespace

TEST_CASE("map_label is the fixed signed mapping") {
  CHECK(map_label(NliLabel::kEntailment) == 0.5);
  CHECK(map_label(NliLabel::kNeutral) == 0.0);
  CHECK(map_label(NliLabel::kContradiction) == -0.5);
  // Total and injective over the three labels.
  std::set<double> values = {map_label(NliLabel::kEntailment), map_label(NliLabel::kNeutral),
                             map_label(NliLabel::kContradiction)};
  CHECK(values.size() == 3);
}

TEST_CASE("rule oracle definitional cases") {
  RuleOracle oracle(lexicon());
  CHECK(oracle.classify(split_words("i like apples ."), split_words("i like apples")) ==
        NliLabel::kEntailment);
  CHECK(oracle.classify(split_words("i like apples ."), split_words("i hate apples")) ==
        NliLabel::kContradiction);
  CHECK(oracle.classify(split_words("the weather is nice ."), split_words("i like apples")) ==
        NliLabel::kNeutral);
  // Exclusive predicate: a different value contradicts.
  CHECK(oracle.classify(split_words("i work as teacher ."), split_words("i work as doctor")) ==
        NliLabel::kContradiction);
  // Non-exclusive: a different value is neutral.
  CHECK(oracle.classify(split_words("i own dogs ."), split_words("i own cats")) ==
        NliLabel::kNeutral);
  CHECK(oracle.classify(split_words("i like apples ."), split_words("i like mangoes")) ==
        NliLabel::kNeutral);
}

TEST_CASE("rule oracle equals the slot-table lookup on 500 random pairs") {
  RuleOracle oracle(lexicon());
  Rng rng(616);
  const auto& lex = lexicon();
  for (int trial = 0; trial < 500; ++trial) {
    Words premise = random_premise(rng, rng.bernoulli(0.8));
    std::size_t pred = rng.below(lex.predicates().size());
    const auto& cat = lex.category(lex.predicates()[pred].category);
    Words hypothesis =
        lex.render_sentence(pred, cat.values[rng.below(cat.values.size())], false);
    CHECK(oracle.classify(premise, hypothesis) == table_lookup_oracle(premise, hypothesis));
  }
}

TEST_CASE("rule oracle is invariant to filler permutations around the slot phrase") {
  RuleOracle oracle(lexicon());
  Rng rng(911);
  Words realization = split_words("i like apples");
  Words fillers = split_words("today the weather is nice honestly");
  Words hypothesis = split_words("i like apples");
  for (int trial = 0; trial < 50; ++trial) {
    Words shuffled = fillers;
    rng.shuffle(shuffled);
    std::size_t cut = rng.below(shuffled.size() + 1);
    Words premise(shuffled.begin(), shuffled.begin() + static_cast<long>(cut));
    premise.insert(premise.end(), realization.begin(), realization.end());
    premise.insert(premise.end(), shuffled.begin() + static_cast<long>(cut), shuffled.end());
    CHECK(oracle.classify(premise, hypothesis) == NliLabel::kEntailment);
  }
}

TEST_CASE("classify requires non-empty inputs") {
  RuleOracle oracle(lexicon());
  CHECK_THROWS_AS(oracle.classify({}, split_words("i like apples")), PreconditionError);
  CHECK_THROWS_AS(oracle.classify(split_words("hello"), {}), PreconditionError);
}

TEST_CASE("lexicon save/load round trip") {
  auto dir = std::filesystem::temp_directory_path() / "gme-lexicon-test";
  std::filesystem::create_directories(dir);
  std::string path = (dir / "lexicon.json").string();
  lexicon().save(path);
  SlotLexicon loaded = SlotLexicon::load(path);
  CHECK(loaded.all_values() == lexicon().all_values());
  CHECK(loaded.predicates().size() == lexicon().predicates().size());
  RuleOracle oracle(loaded);
  CHECK(oracle.classify(split_words("i work as pilot ."), split_words("i work as pilot")) ==
        NliLabel::kEntailment);
  std::filesystem::remove_all(dir);
}

TEST_CASE("external backend speaks the tab-separated line protocol") {
  ExternalNliBackend backend("python3 " GME_TEST_HELPERS_DIR "/stub_nli.py");
  auto labels = backend.classify_batch({
      {split_words("i like apples"), split_words("i like apples")},
      {split_words("i do not like apples"), split_words("like apples")},
      {split_words("totally unrelated"), split_words("i like apples")},
  });
  REQUIRE(labels.size() == 3);
  CHECK(labels[0] == NliLabel::kEntailment);
  CHECK(labels[1] == NliLabel::kContradiction);
  CHECK(labels[2] == NliLabel::kNeutral);
}

TEST_CASE("external backend failure is an error, never a silent neutral") {
  ExternalNliBackend failing("sh " GME_TEST_HELPERS_DIR "/failing_backend.sh");
  CHECK_THROWS_AS(failing.classify(split_words("a"), split_words("b")), BackendError);
  // A backend answering garbage labels is also an error.
  ExternalNliBackend garbage("sed s/.*/bogus-label/");
  CHECK_THROWS_AS(garbage.classify(split_words("a"), split_words("b")), BackendError);
}

TEST_CASE("make_backend resolves descriptors") {
  auto dir = std::filesystem::temp_directory_path() / "gme-backend-test";
  std::filesystem::create_directories(dir);
  std::string path = (dir / "lexicon.json").string();
  lexicon().save(path);
  NliBackendDescriptor rule{NliBackendDescriptor::Kind::kRuleOracle, path};
  auto backend = make_backend(rule);
  CHECK(backend->classify(split_words("i own cats ."), split_words("i own cats")) ==
        NliLabel::kEntailment);
  NliBackendDescriptor missing{NliBackendDescriptor::Kind::kRuleOracle, ""};
  CHECK_THROWS_AS(make_backend(missing), ConfigError);
  std::filesystem::remove_all(dir);
}
