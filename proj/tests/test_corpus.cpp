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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gme/common/error.hpp"
#include "gme/common/rng.hpp"
#include "gme/corpus/filters.hpp"
#include "gme/corpus/io.hpp"
#include "gme/corpus/synthetic.hpp"
#include "gme/nli/nli.hpp"

using namespace gme;
using namespace gme::corpus;

namespace {

std::string temp_dir(const char* tag) {
  auto dir = std::filesystem::temp_directory_path() /
             (std::string("gme-test-") + tag + "-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

DialogueSample sample_fixture() {
  DialogueSample s;
  s.history = {{Speaker::kSpeaker1, split_words("hello there .")},
               {Speaker::kSpeaker2, split_words("hi , how are you ?")}};
  s.response = split_words("i am fine . i like apples .");
  s.persona = {split_words("i like apples"), split_words("i own dogs")};
  return s;
}

}  // namespace

TEST_CASE("training record round trip") {
  DialogueSample s = sample_fixture();
  std::string line = training_record_to_json(s);
  DialogueSample back = training_record_from_json(line);
  CHECK(back == s);
}

TEST_CASE("edit case round trip with and without references") {
  EditCase c;
  c.history = {{Speaker::kSpeaker1, split_words("hello .")}};
  c.original_response = split_words("i hate apples .");
  c.editing_persona = {split_words("i like apples")};
  SUBCASE("no references") {
    EditCase back = edit_case_from_json(edit_case_to_json(c));
    CHECK(back == c);
    CHECK(back.references.empty());
  }
  SUBCASE("three references") {
    c.references = {split_words("i like apples ."), split_words("apples are great ."),
                    split_words("i like apples a lot .")};
    EditCase back = edit_case_from_json(edit_case_to_json(c));
    CHECK(back == c);
  }
}

TEST_CASE("file round trip preserves samples field by field") {
  std::string dir = temp_dir("roundtrip");
  std::vector<DialogueSample> samples = {sample_fixture(), sample_fixture()};
  samples[1].response = split_words("something else entirely .");
  write_training_corpus(dir + "/x.jsonl", samples);
  auto loaded = load_training_corpus(dir + "/x.jsonl");
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0] == samples[0]);
  CHECK(loaded[1] == samples[1]);
  std::filesystem::remove_all(dir);
}

TEST_CASE("loader preserves file order and handles the empty file") {
  std::string dir = temp_dir("loader");
  {
    std::ofstream out(dir + "/three.jsonl");
    for (const char* r : {"first reply .", "second reply .", "third reply ."}) {
      DialogueSample s = sample_fixture();
      s.response = split_words(r);
      out << training_record_to_json(s) << "\n";
    }
    std::ofstream empty(dir + "/empty.jsonl");
  }
  auto three = load_training_corpus(dir + "/three.jsonl");
  REQUIRE(three.size() == 3);
  CHECK(join_words(three[0].response) == "first reply .");
  CHECK(join_words(three[2].response) == "third reply .");
  CHECK(load_training_corpus(dir + "/empty.jsonl").empty());
  CHECK_THROWS_AS(load_training_corpus(dir + "/absent.jsonl"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("loader aborts above 1% malformed and reports line numbers") {
  std::string dir = temp_dir("malformed");
  {
    std::ofstream out(dir + "/bad.jsonl");
    out << training_record_to_json(sample_fixture()) << "\n";
    out << "{ not json\n";
    out << training_record_to_json(sample_fixture()) << "\n";
  }
  try {
    load_training_corpus(dir + "/bad.jsonl");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    std::string what = e.what();
    CHECK(what.find("line 2") != std::string::npos);
  }

  // 1 bad line out of 300 stays under the cap; the error is still recorded.
  {
    std::ofstream out(dir + "/mostly_good.jsonl");
    for (int i = 0; i < 150; ++i) out << training_record_to_json(sample_fixture()) << "\n";
    out << "{\"history\": []}\n";
    for (int i = 0; i < 150; ++i) out << training_record_to_json(sample_fixture()) << "\n";
  }
  TrainingCorpusReader reader(dir + "/mostly_good.jsonl");
  std::size_t n = 0;
  while (reader.next()) ++n;
  CHECK(n == 300);
  CHECK(reader.malformed_count() == 1);
  REQUIRE(reader.errors().size() == 1);
  CHECK(reader.errors()[0].line_number == 151);
  std::filesystem::remove_all(dir);
}

TEST_CASE("loader rejects schema violations") {
  CHECK_THROWS_AS(training_record_from_json("{\"response\": \"x\"}"), SchemaError);
  CHECK_THROWS_AS(training_record_from_json(
                      R"({"history": [], "response": "", "persona": ["p"]})"),
                  SchemaError);
  // Non-alternating speakers.
  CHECK_THROWS_AS(
      training_record_from_json(
          R"({"history": [{"speaker":"s1","text":"a"},{"speaker":"s1","text":"b"}], "response": "r", "persona": ["p"]})"),
      SchemaError);
  // Persona must not be empty.
  CHECK_THROWS_AS(
      training_record_from_json(R"({"history": [], "response": "r", "persona": []})"),
      SchemaError);
  // Editing persona limited to 1 or 2 sentences.
  CHECK_THROWS_AS(
      edit_case_from_json(
          R"({"history": [], "original_response": "r", "editing_persona": ["a","b","c"]})"),
      SchemaError);
}

TEST_CASE("duplicate case lines are both retained") {
  std::string dir = temp_dir("dup");
  EditCase c;
  c.original_response = split_words("i hate apples .");
  c.editing_persona = {split_words("i like apples")};
  {
    std::ofstream out(dir + "/cases.jsonl");
    out << edit_case_to_json(c) << "\n" << edit_case_to_json(c) << "\n";
  }
  auto cases = load_edit_cases(dir + "/cases.jsonl");
  REQUIRE(cases.size() == 2);
  CHECK(cases[0] == cases[1]);
  std::filesystem::remove_all(dir);
}

TEST_CASE("filter_persona_leakage") {
  std::vector<DialogueSample> train;
  for (int i = 0; i < 10; ++i) {
    DialogueSample s = sample_fixture();
    if (i % 3 == 0) s.persona = {split_words("i work as teacher")};  // 0,3,6,9
    train.push_back(s);
  }

  SUBCASE("empty filter set is the identity") {
    auto result = filter_persona_leakage(train, {});
    CHECK(result.retained.size() == 10);
    CHECK(result.dropped == 0);
  }
  SUBCASE("normalized exact match drops the sample") {
    auto result = filter_persona_leakage(train, {"i work as teacher"});
    CHECK(result.dropped == 4);
    CHECK(result.retained.size() == 6);
  }
  SUBCASE("terminal punctuation is stripped before comparison") {
    std::vector<DialogueSample> one = {sample_fixture()};
    one[0].persona = {split_words("i like apples .")};
    auto result = filter_persona_leakage(one, {"i like apples"});
    CHECK(result.dropped == 1);
  }
  SUBCASE("retained is a subsequence and counts add up") {
    std::set<std::string> editing = {"i like apples"};
    auto result = filter_persona_leakage(train, editing);
    CHECK(result.retained.size() + result.dropped == train.size());
    // Brute-force recount.
    std::size_t expected_drop = 0;
    for (const auto& s : train) {
      bool hit = false;
      for (const auto& p : s.persona) {
        if (normalize_persona_sentence(p) == "i like apples") hit = true;
      }
      expected_drop += hit ? 1 : 0;
    }
    CHECK(result.dropped == expected_drop);
  }
}

TEST_CASE("select_editing_personas applies the three criteria") {
  nli::RuleOracle oracle(builtin_lexicon());

  CaseSeed seed;
  seed.history = {{Speaker::kSpeaker1, split_words("hello .")},
                  {Speaker::kSpeaker2, split_words("i like tennis .")},
                  {Speaker::kSpeaker1, split_words("nice .")}};
  seed.original_response = split_words("i like apples .");

  std::vector<Words> good = {split_words("i hate apples")};         // contradicts response
  std::vector<Words> history_clash = {split_words("i hate apples"),
                                      split_words("i hate tennis")};  // clashes with s2 turn
  std::vector<Words> self_clash = {split_words("i hate apples"),
                                   split_words("i like apples")};     // internally inconsistent
  std::vector<Words> no_conflict = {split_words("i own dogs")};       // no contradiction at all

  auto selected = select_editing_personas({seed}, {good, history_clash, self_clash, no_conflict},
                                          oracle);
  REQUIRE(selected.size() == 1);
  CHECK(selected[0].editing_persona == good);
}

TEST_CASE("select_editing_personas equals brute-force pair enumeration") {
  nli::RuleOracle oracle(builtin_lexicon());
  auto synthetic = generate_synthetic_corpus(99, {30, 5, 5});

  std::vector<CaseSeed> seeds;
  for (const auto& c : synthetic.test_cases) {
    seeds.push_back({c.history, c.original_response});
  }
  std::vector<std::vector<Words>> pool;
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    // Profiles drawn from the grammar: one or two sentences.
    const auto& lex = synthetic.lexicon;
    auto values = lex.all_values();
    std::vector<Words> profile;
    std::size_t n = 1 + rng.below(2);
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t pred = rng.below(lex.predicates().size());
      const auto& cat = lex.category(lex.predicates()[pred].category);
      profile.push_back(lex.render_sentence(pred, cat.values[rng.below(cat.values.size())],
                                            false));
    }
    pool.push_back(profile);
  }

  auto selected = select_editing_personas(seeds, pool, oracle);

  // Brute force over all seed x profile pairs.
  std::vector<EditCase> expected;
  for (const auto& seed : seeds) {
    Speaker self = responder(seed.history);
    for (const auto& profile : pool) {
      bool a = false, b_bad = false, c_bad = false;
      for (const auto& s : profile) {
        if (oracle.classify(seed.original_response, s) == nli::NliLabel::kContradiction) {
          a = true;
        }
        for (const auto& turn : seed.history) {
          if (turn.speaker == self &&
              oracle.classify(turn.text, s) == nli::NliLabel::kContradiction) {
            b_bad = true;
          }
        }
        for (const auto& s2 : profile) {
          if (&s != &s2 &&
              oracle.classify(s, s2) == nli::NliLabel::kContradiction) {
            c_bad = true;
          }
        }
      }
      if (a && !b_bad && !c_bad) {
        EditCase c;
        c.history = seed.history;
        c.original_response = seed.original_response;
        c.editing_persona = profile;
        expected.push_back(c);
      }
    }
  }
  REQUIRE(selected.size() == expected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) CHECK(selected[i] == expected[i]);
}

TEST_CASE("select_editing_personas is pool-order invariant as a set") {
  nli::RuleOracle oracle(builtin_lexicon());
  CaseSeed seed;
  seed.original_response = split_words("i like apples . i work as teacher .");
  std::vector<std::vector<Words>> pool = {{split_words("i hate apples")},
                                          {split_words("i work as doctor")},
                                          {split_words("i own dogs")}};
  auto forward = select_editing_personas({seed}, pool, oracle);
  std::reverse(pool.begin(), pool.end());
  auto backward = select_editing_personas({seed}, pool, oracle);
  REQUIRE(forward.size() == backward.size());
  for (const auto& c : forward) {
    bool found = false;
    for (const auto& c2 : backward) {
      if (c == c2) found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("synthetic corpus is byte-identical for a fixed seed") {
  std::string dir_a = temp_dir("synth-a");
  std::string dir_b = temp_dir("synth-b");
  auto a = generate_synthetic_corpus(1234, {50, 10, 12});
  auto b = generate_synthetic_corpus(1234, {50, 10, 12});
  write_synthetic_corpus(a, dir_a);
  write_synthetic_corpus(b, dir_b);
  for (const char* name :
       {"/train.jsonl", "/valid.jsonl", "/valid_cases.jsonl", "/test_cases.jsonl",
        "/lexicon.json"}) {
    CHECK(slurp(dir_a + name) == slurp(dir_b + name));
  }
  auto c = generate_synthetic_corpus(1235, {50, 10, 12});
  CHECK(!(c.train[0] == a.train[0]));
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
}

TEST_CASE("synthetic realized persona sentences are entailed by the response") {
  auto synthetic = generate_synthetic_corpus(777, {200, 20, 20});
  nli::RuleOracle oracle(synthetic.lexicon);
  std::size_t realized_count = 0;
  for (const auto& s : synthetic.train) {
    for (const auto& p : s.persona) {
      auto parsed = synthetic.lexicon.parse_persona_sentence(p);
      REQUIRE(parsed.has_value());
      bool realized = false;
      for (const auto& r : synthetic.lexicon.find_realizations(s.response)) {
        if (r.predicate_index == parsed->predicate_index && r.value == parsed->value) {
          realized = true;
        }
      }
      if (realized) {
        ++realized_count;
        CHECK(oracle.classify(s.response, p) == nli::NliLabel::kEntailment);
      }
    }
  }
  CHECK(realized_count > 200);  // personas are aligned with responses
  // Edit cases: the editing persona contradicts the original response.
  for (const auto& c : synthetic.test_cases) {
    bool any_contradiction = false;
    for (const auto& p : c.editing_persona) {
      if (oracle.classify(c.original_response, p) == nli::NliLabel::kContradiction) {
        any_contradiction = true;
      }
    }
    CHECK(any_contradiction);
    REQUIRE(c.references.size() == 3);
    // References must entail the target persona sentence.
    CHECK(oracle.classify(c.references[0], c.editing_persona[0]) ==
          nli::NliLabel::kEntailment);
  }
}

TEST_CASE("synthetic slot-value marginal is near uniform") {
  auto synthetic = generate_synthetic_corpus(4242, {10000, 1, 1}, /*leak_rate=*/0.0);
  const auto& lex = synthetic.lexicon;
  auto values = lex.all_values();
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& s : synthetic.train) {
    for (const auto& p : s.persona) {
      auto parsed = lex.parse_persona_sentence(p);
      REQUIRE(parsed.has_value());
      counts[parsed->value] += 1;
      ++total;
    }
  }
  double tv = 0.0;
  double uniform = 1.0 / static_cast<double>(values.size());
  for (const auto& v : values) {
    double p = static_cast<double>(counts[v]) / static_cast<double>(total);
    tv += std::fabs(p - uniform);
  }
  tv *= 0.5;
  CHECK(tv <= 0.03);
}

TEST_CASE("corpus stats histogram sums to the sample count") {
  auto synthetic = generate_synthetic_corpus(55, {137, 10, 10});
  CorpusStats stats = compute_stats(synthetic.train);
  CHECK(stats.sample_count == 137);
  std::size_t histogram_total = 0;
  for (const auto& [k, v] : stats.persona_sentence_histogram) histogram_total += v;
  CHECK(histogram_total == stats.sample_count);
}

TEST_CASE("editing persona sentences are held out of training personas") {
  auto synthetic = generate_synthetic_corpus(31337, {400, 40, 60}, /*leak_rate=*/0.0);
  auto editing = editing_persona_set(synthetic.test_cases);
  auto valid_editing = editing_persona_set(synthetic.valid_cases);
  editing.insert(valid_editing.begin(), valid_editing.end());
  for (const auto& s : synthetic.train) {
    for (const auto& p : s.persona) {
      CHECK(editing.count(normalize_persona_sentence(p)) == 0);
    }
  }
}
