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

#include <algorithm>
#include <cmath>
#include <map>

#include "gme/common/error.hpp"
#include "gme/common/rng.hpp"
#include "gme/eval/lm_nll.hpp"
#include "gme/eval/metrics.hpp"
#include "gme/eval/pscore.hpp"
#include "gme/eval/report.hpp"
#include "test_oracles.hpp"

using namespace gme;
using namespace gme::eval;

namespace {

Words random_words(Rng& rng, std::size_t max_len, std::size_t vocab) {
  std::size_t len = rng.below(max_len + 1);
  Words w;
  for (std::size_t i = 0; i < len; ++i) {
    w.push_back(std::string(1, static_cast<char>('a' + rng.below(vocab))));
  }
  return w;
}

// Fixed-response NLI stub keyed by (premise, hypothesis) rendering.
class StubNli : public nli::NliBackend {
 public:
  std::map<std::pair<std::string, std::string>, nli::NliLabel> table;
  nli::NliLabel fallback = nli::NliLabel::kNeutral;

  nli::NliLabel classify(const Words& premise, const Words& hypothesis) const override {
    auto it = table.find({join_words(premise), join_words(hypothesis)});
    return it == table.end() ? fallback : it->second;
  }
};

class StubScorer : public LmScorer {
 public:
  explicit StubScorer(double per_word) : per_word_(per_word) {}
  std::vector<std::pair<double, std::size_t>> score(
      const std::vector<Words>& responses) const override {
    std::vector<std::pair<double, std::size_t>> out;
    for (const auto& r : responses) {
      out.emplace_back(per_word_ * static_cast<double>(r.size()), r.size());
    }
    return out;
  }

 private:
  double per_word_;
};

}  // namespace

TEST_CASE("med basics") {
  CHECK(med(split_words("a b c"), split_words("a b c")) == 0);
  CHECK(med(split_words("a b c"), split_words("a x c")) == 1);
  CHECK(med({}, split_words("a b")) == 2);
  CHECK(med(split_words("a b"), {}) == 2);
}

TEST_CASE("med equals brute-force recursion on 200 random pairs") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    Words a = random_words(rng, 7, 5);
    Words b = random_words(rng, 7, 5);
    CHECK(med(a, b) == test_oracles::med_recursive(a, b));
  }
}

TEST_CASE("med is a metric") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    Words a = random_words(rng, 6, 4);
    Words b = random_words(rng, 6, 4);
    Words c = random_words(rng, 6, 4);
    CHECK(med(a, b) == med(b, a));
    CHECK((med(a, b) == 0) == (a == b));
    CHECK(med(a, c) <= med(a, b) + med(b, c));
  }
}

TEST_CASE("behavioral stats of the no-edit row are all zero") {
  Words r = split_words("i like dogs .");
  BehavioralStats stats = behavioral_stats({{r, r, {split_words("i like cats")}}});
  CHECK(stats.add == 0.0);
  CHECK(stats.rm == 0.0);
  CHECK(stats.delta_len == 0.0);
  CHECK(stats.med_to_original == 0.0);
}

TEST_CASE("behavioral stats hand case") {
  BehavioralPair pair{split_words("i like dogs"), split_words("i like cats a lot"), {}};
  BehavioralStats stats = behavioral_stats({pair});
  CHECK(stats.add == doctest::Approx(3.0));
  CHECK(stats.rm == doctest::Approx(1.0));
  CHECK(stats.delta_len == doctest::Approx(2.0));
}

TEST_CASE("add - rm equals delta_len exactly under bag differences") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    Words a = random_words(rng, 10, 4);
    Words b = random_words(rng, 10, 4);
    if (a.empty() && b.empty()) continue;
    BehavioralStats stats = behavioral_stats({{a, b, {}}});
    CHECK(stats.add - stats.rm == doctest::Approx(stats.delta_len).epsilon(1e-12));
  }
}

TEST_CASE("behavioral stats persona distance modes") {
  Words edited = split_words("a b");
  std::vector<Words> persona = {split_words("a b"), split_words("x y z q")};
  BehavioralStats concat = behavioral_stats({{edited, edited, persona}}, false);
  BehavioralStats minimum = behavioral_stats({{edited, edited, persona}}, true);
  // Concatenated persona is "a b x y z q" (distance 4); min over sentences is 0.
  CHECK(concat.med_to_persona == doctest::Approx(4.0));
  CHECK(minimum.med_to_persona == doctest::Approx(0.0));
}

TEST_CASE("behavioral stats rejects empty input") {
  CHECK_THROWS_AS(behavioral_stats({}), PreconditionError);
}

TEST_CASE("bleu is 100 on verbatim matches") {
  std::vector<Words> preds = {split_words("the cat sat on the mat"),
                              split_words("hello there friend of mine")};
  std::vector<std::vector<Words>> refs = {
      {split_words("a totally different line"), preds[0]},
      {preds[1]}};
  CHECK(multi_ref_bleu(preds, refs) == doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("bleu hand computation with brevity penalty") {
  std::vector<Words> preds = {split_words("a b c d")};
  std::vector<std::vector<Words>> refs = {{split_words("a b c d e")}};
  double expected = 100.0 * std::exp(1.0 - 5.0 / 4.0);
  CHECK(multi_ref_bleu(preds, refs) == doctest::Approx(expected).epsilon(1e-6));
  CHECK(multi_ref_bleu(preds, refs) == doctest::Approx(77.8800783).epsilon(1e-4));
}

TEST_CASE("bleu agrees with the independent multi-bleu transliteration on 50 sets") {
  Rng rng(9001);
  for (int set = 0; set < 50; ++set) {
    std::size_t n = 1 + rng.below(8);
    std::vector<Words> preds;
    std::vector<std::vector<Words>> refs;
    for (std::size_t i = 0; i < n; ++i) {
      Words p = random_words(rng, 14, 6);
      if (p.empty()) p.push_back("a");
      preds.push_back(p);
      std::vector<Words> r;
      std::size_t n_refs = 1 + rng.below(3);
      for (std::size_t j = 0; j < n_refs; ++j) {
        Words ref = random_words(rng, 14, 6);
        if (ref.empty()) ref.push_back("b");
        // Bias towards overlap so higher-order n-grams sometimes match.
        if (rng.bernoulli(0.5)) {
          ref = p;
          if (!ref.empty() && rng.bernoulli(0.7)) {
            ref[rng.below(ref.size())] = std::string(1, static_cast<char>('a' + rng.below(6)));
          }
        }
        r.push_back(ref);
      }
      refs.push_back(r);
    }
    double ours = multi_ref_bleu(preds, refs);
    double oracle = test_oracles::multi_bleu_perl(preds, refs);
    CHECK(ours == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(std::abs(ours - oracle) < 0.01);
  }
}

TEST_CASE("bleu is invariant to reference order") {
  Rng rng(515);
  std::vector<Words> preds;
  std::vector<std::vector<Words>> refs;
  for (int i = 0; i < 5; ++i) {
    preds.push_back(random_words(rng, 10, 5));
    if (preds.back().empty()) preds.back().push_back("a");
    refs.push_back({random_words(rng, 10, 5), preds.back(), random_words(rng, 10, 5)});
    for (auto& r : refs.back()) {
      if (r.empty()) r.push_back("c");
    }
  }
  double base = multi_ref_bleu(preds, refs);
  for (auto& r : refs) std::reverse(r.begin(), r.end());
  CHECK(multi_ref_bleu(preds, refs) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("bleu error paths") {
  CHECK_THROWS_AS(multi_ref_bleu({}, {}), PreconditionError);
  CHECK_THROWS_AS(multi_ref_bleu({split_words("a")}, {{}}), PreconditionError);
}

TEST_CASE("unigram f1") {
  CHECK(unigram_f1(split_words("a b c"), {split_words("a b c")}) == doctest::Approx(1.0));
  CHECK(unigram_f1(split_words("a b"), {split_words("x y")}) == doctest::Approx(0.0));
  CHECK(unigram_f1(split_words("a b"), {split_words("a c")}) == doctest::Approx(0.5));
  // Max over references.
  CHECK(unigram_f1(split_words("a b"), {split_words("x"), split_words("a b")}) ==
        doctest::Approx(1.0));
}

TEST_CASE("average score matches reported rows") {
  CHECK(average_score(60.3, 29.9) == doctest::Approx(45.1).epsilon(1e-12));
  CHECK(average_score(76.4, -30.5) == doctest::Approx(22.95).epsilon(1e-12));
  CHECK(average_score(0.0, 0.0) == 0.0);
  CHECK(format_score(average_score(76.4, -30.5)) == "23.0");
  CHECK(format_score(average_score(60.3, 29.9)) == "45.1");
}

TEST_CASE("p_score single and paired sentences") {
  StubNli nli;
  Words r1 = split_words("i love hiking");
  nli.table[{join_words(r1), "i love hiking"}] = nli::NliLabel::kEntailment;
  nli.table[{join_words(r1), "i hate hiking"}] = nli::NliLabel::kContradiction;

  auto one = p_score({r1}, {{split_words("i love hiking")}}, nli);
  CHECK(one.mean == doctest::Approx(0.5));
  auto two = p_score({r1}, {{split_words("i love hiking"), split_words("i hate hiking")}}, nli);
  CHECK(two.mean == doctest::Approx(0.0));
  CHECK(two.entailment_count == 1);
  CHECK(two.contradiction_count == 1);
}

TEST_CASE("p_score mixed fixture matches the hand sum") {
  StubNli nli;
  // Six samples; labels fixed per persona sentence via fallback cycling.
  std::vector<Words> responses;
  std::vector<std::vector<Words>> personas;
  std::vector<nli::NliLabel> labels = {
      nli::NliLabel::kEntailment, nli::NliLabel::kNeutral, nli::NliLabel::kContradiction,
      nli::NliLabel::kEntailment, nli::NliLabel::kEntailment, nli::NliLabel::kContradiction,
      nli::NliLabel::kNeutral, nli::NliLabel::kEntailment};
  std::size_t label_idx = 0;
  double expected_total = 0.0;
  std::vector<std::size_t> sentence_counts = {1, 2, 1, 1, 2, 1};
  for (std::size_t s = 0; s < 6; ++s) {
    Words r = {"r" + std::to_string(s)};
    responses.push_back(r);
    std::vector<Words> persona;
    double sample = 0.0;
    for (std::size_t j = 0; j < sentence_counts[s]; ++j) {
      Words p = {"p" + std::to_string(s) + std::to_string(j)};
      persona.push_back(p);
      nli.table[{join_words(r), join_words(p)}] = labels[label_idx];
      sample += nli::map_label(labels[label_idx]);
      ++label_idx;
    }
    personas.push_back(persona);
    expected_total += sample;
  }
  auto result = p_score(responses, personas, nli);
  CHECK(result.mean == doctest::Approx(expected_total / 6.0).epsilon(1e-12));

  // Sample-order invariance of the mean.
  std::reverse(responses.begin(), responses.end());
  std::reverse(personas.begin(), personas.end());
  CHECK(p_score(responses, personas, nli).mean ==
        doctest::Approx(expected_total / 6.0).epsilon(1e-12));
}

TEST_CASE("p_score per-sample values are bounded by 0.5 per sentence") {
  StubNli nli;
  nli.fallback = nli::NliLabel::kEntailment;
  auto result = p_score({split_words("x")}, {{split_words("a"), split_words("b")}}, nli);
  CHECK(result.per_sample[0] <= 1.0);
  CHECK(result.per_sample[0] >= -1.0);
}

TEST_CASE("external lm nll with stub scorers") {
  StubScorer uniform(-1.0);
  CHECK(external_lm_nll({split_words("a b c"), split_words("d e")}, uniform) ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(external_lm_nll({}, uniform), PreconditionError);
}

TEST_CASE("external lm nll weighted hand fixture") {
  class Fixture : public LmScorer {
   public:
    std::vector<std::pair<double, std::size_t>> score(
        const std::vector<Words>&) const override {
      return {{-2.0, 2}, {-9.0, 3}, {-1.0, 1}};
    }
  } scorer;
  std::vector<Words> rs = {split_words("a b"), split_words("a b c"), split_words("a")};
  CHECK(external_lm_nll(rs, scorer) == doctest::Approx(12.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("external lm scorer subprocess protocol") {
  ExternalLmScorer scorer("python3 " GME_TEST_HELPERS_DIR "/stub_lm.py");
  std::vector<Words> rs = {split_words("three word line"), split_words("two words")};
  auto scores = scorer.score(rs);
  REQUIRE(scores.size() == 2);
  CHECK(scores[0].first == doctest::Approx(-3.0));
  CHECK(scores[0].second == 3);
  CHECK(external_lm_nll(rs, scorer) == doctest::Approx(1.0));
}

TEST_CASE("evaluate_predictions assembles a report") {
  corpus::EditCase c;
  c.history = {{corpus::Speaker::kSpeaker1, split_words("hello there .")}};
  c.original_response = split_words("i like winter .");
  c.editing_persona = {split_words("i like summer")};
  c.references = {split_words("i like summer .")};
  StubNli nli;
  nli.table[{"i like summer .", "i like summer"}] = nli::NliLabel::kEntailment;
  EvaluateOptions opts;
  opts.nli = &nli;
  auto report = evaluate_predictions({c}, {split_words("i like summer .")}, opts);
  REQUIRE(report.bleu.has_value());
  CHECK(*report.bleu == doctest::Approx(100.0));
  CHECK(*report.p_score == doctest::Approx(50.0));  // x100 reporting scale
  CHECK(*report.average == doctest::Approx(75.0));
  CHECK(report.behavioral->med_to_original == doctest::Approx(1.0));
}
