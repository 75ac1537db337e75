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

#include "gme/corpus/synthetic.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "gme/common/error.hpp"
#include "gme/common/rng.hpp"
#include "gme/corpus/io.hpp"
#include "gme/nli/nli.hpp"

namespace gme::corpus {

namespace {

const std::vector<std::string>& topic_values() {
  static const std::vector<std::string> v = {
      "apples",   "mangoes",  "bananas",   "grapes",   "peaches",  "pizza",
      "pasta",    "sushi",    "tacos",     "soup",     "hiking",   "swimming",
      "dancing",  "painting", "chess",     "jazz",     "opera",    "camping",
      "fishing",  "baseball", "tennis",    "golf",     "skiing",   "yoga",
      "knitting", "gardening", "photography", "astronomy", "poetry", "cooking"};
  return v;
}

const std::vector<std::string>& item_values() {
  static const std::vector<std::string> v = {
      "dogs",    "cats",        "horses",  "rabbits", "parrots", "hamsters",
      "bicycles", "motorcycles", "guitars", "pianos",  "canoes",  "telescopes"};
  return v;
}

const std::vector<std::string>& job_values() {
  static const std::vector<std::string> v = {
      "teacher", "doctor", "nurse",  "farmer", "baker",     "plumber",
      "lawyer",  "barber", "pilot",  "chef",   "carpenter", "librarian"};
  return v;
}

const std::vector<Words>& filler_sentences() {
  static const std::vector<Words> v = {
      split_words("the weather is nice today ."),
      split_words("that sounds really great ."),
      split_words("how are you doing ?"),
      split_words("i had a long day ."),
      split_words("it is getting late here ."),
      split_words("my weekend was quite busy ."),
      split_words("we should talk more often ."),
      split_words("that reminds me of home ."),
      split_words("the city was crowded yesterday ."),
      split_words("i hope you are well ."),
      split_words("time flies when we chat ."),
      split_words("everyone needs a little rest ."),
  };
  return v;
}

// A persona sentence of the grammar, tracked structurally.
struct Sentence {
  std::size_t pred = 0;  // predicate index in the lexicon
  std::string value;

  bool operator==(const Sentence& o) const { return pred == o.pred && value == o.value; }
  bool operator<(const Sentence& o) const {
    return pred != o.pred ? pred < o.pred : value < o.value;
  }
};

constexpr std::size_t kPredLike = 0;
constexpr std::size_t kPredHate = 1;
constexpr std::size_t kPredOwn = 2;
constexpr std::size_t kPredWork = 3;

class Generator {
 public:
  Generator(std::uint64_t seed, SyntheticSizes sizes, double leak_rate)
      : rng_(splitmix64(seed ^ 0x67d2c4a9ull)),
        sizes_(sizes),
        leak_rate_(leak_rate),
        lexicon_(builtin_lexicon()),
        all_values_(lexicon_.all_values()) {}

  SyntheticCorpus run() {
    SyntheticCorpus out;
    out.lexicon = lexicon_;
    // Editing sentences are fixed up front so training can avoid them.
    reserve_editing_pool();
    out.valid_cases = make_cases(std::max<std::size_t>(20, sizes_.test / 5));
    out.test_cases = make_cases(sizes_.test);
    out.train = make_samples(sizes_.train);
    out.valid = make_samples(sizes_.valid);
    return out;
  }

 private:
  const std::string& pick(const std::vector<std::string>& values) {
    return values[rng_.below(values.size())];
  }

  Words render(const Sentence& s, bool period) const {
    return lexicon_.render_sentence(s.pred, s.value, period);
  }

  // Uniform over all slot values; the predicate follows the value's category.
  Sentence draw_sentence() {
    Sentence s;
    s.value = all_values_[rng_.below(all_values_.size())];
    if (std::find(topic_values().begin(), topic_values().end(), s.value) !=
        topic_values().end()) {
      s.pred = rng_.bernoulli(0.5) ? kPredLike : kPredHate;
    } else if (std::find(item_values().begin(), item_values().end(), s.value) !=
               item_values().end()) {
      s.pred = kPredOwn;
    } else {
      s.pred = kPredWork;
    }
    return s;
  }

  // Training persona sentence: avoids the editing pool (topic sentences can
  // flip to the opposite predicate, which keeps the value marginal uniform),
  // except for the deliberate leak.
  Sentence draw_training_sentence() {
    for (;;) {
      Sentence s = draw_sentence();
      if (!editing_pool_.count(s)) return s;
      if (rng_.bernoulli(leak_rate_)) return s;  // leaked on purpose
      if (s.pred == kPredLike || s.pred == kPredHate) {
        Sentence flipped{s.pred == kPredLike ? kPredHate : kPredLike, s.value};
        if (!editing_pool_.count(flipped)) return flipped;
      }
      // redraw
    }
  }

  bool contradicts(const Sentence& a, const Sentence& b) const {
    if (a.value == b.value &&
        ((a.pred == kPredLike && b.pred == kPredHate) ||
         (a.pred == kPredHate && b.pred == kPredLike))) {
      return true;
    }
    return a.pred == kPredWork && b.pred == kPredWork && a.value != b.value;
  }

  void reserve_editing_pool() {
    // Topic-flip sentences drive the contradiction edits; a quarter of the
    // topics are reserved per predicate side.
    const auto& topics = topic_values();
    std::vector<std::string> shuffled = topics;
    rng_.shuffle(shuffled);
    std::size_t n_reserved = topics.size() / 2;
    for (std::size_t i = 0; i < n_reserved; ++i) {
      std::size_t pred = rng_.bernoulli(0.5) ? kPredLike : kPredHate;
      editing_targets_.push_back({pred, shuffled[i]});
      editing_pool_.insert(editing_targets_.back());
    }
  }

  // edit_case_mode keeps responder turns filler-only and restricts the other
  // speaker's realizations to own/work, whose words never collide with the
  // like/hate spans an edit has to rewrite (history words are protected from
  // masking at inference).
  std::vector<DialogueTurn> make_history(std::size_t turns, Speaker last,
                                         bool edit_case_mode,
                                         const std::vector<Sentence>& avoid) {
    std::vector<DialogueTurn> history(turns);
    Speaker s = last;
    for (std::size_t i = turns; i-- > 0;) {
      history[i].speaker = s;
      s = other(s);
    }
    Speaker self = other(last);  // the responder
    for (auto& turn : history) {
      bool can_realize =
          !(edit_case_mode && turn.speaker == self) && rng_.bernoulli(0.25);
      if (can_realize) {
        for (int attempt = 0; attempt < 8; ++attempt) {
          Sentence cand = draw_sentence();
          if (edit_case_mode && cand.pred != kPredOwn && cand.pred != kPredWork) continue;
          bool bad = false;
          for (const auto& a : avoid) {
            if (contradicts(cand, a) || cand == a) bad = true;
          }
          if (!bad) {
            turn.text = render(cand, true);
            break;
          }
        }
      }
      if (turn.text.empty()) turn.text = filler_sentences()[rng_.below(filler_sentences().size())];
    }
    return history;
  }

  Words assemble_response(const std::vector<Words>& realized) {
    std::vector<Words> sentences = realized;
    std::size_t fillers = 1 + rng_.below(2);
    for (std::size_t i = 0; i < fillers; ++i) {
      sentences.push_back(filler_sentences()[rng_.below(filler_sentences().size())]);
    }
    rng_.shuffle(sentences);
    Words response;
    for (const auto& s : sentences) response.insert(response.end(), s.begin(), s.end());
    return response;
  }

  std::vector<DialogueSample> make_samples(std::size_t count) {
    std::vector<DialogueSample> samples;
    samples.reserve(count);
    while (samples.size() < count) {
      DialogueSample sample;
      std::size_t n_persona = rng_.bernoulli(0.55) ? 2 : 1;
      std::vector<Sentence> persona;
      // Training profiles only reject duplicates. Rejecting contradictory
      // pairs here would skew the slot-value marginal (exclusive-slot values
      // lose mass in second draws); consistency criteria bind editing
      // personas, not training ones.
      for (int attempt = 0; attempt < 32 && persona.size() < n_persona; ++attempt) {
        Sentence cand = draw_training_sentence();
        bool ok = true;
        for (const auto& p : persona) {
          if (cand == p) ok = false;
        }
        if (ok) persona.push_back(cand);
      }
      for (const auto& p : persona) sample.persona.push_back(render(p, false));

      // Personas are aligned with responses: a sentence is attached because
      // the response realizes it, bar a small misalignment rate.
      std::vector<Words> realized;
      for (const auto& p : persona) {
        if (!rng_.bernoulli(0.02)) realized.push_back(render(p, true));
      }
      rng_.shuffle(realized);
      sample.response = assemble_response(realized);

      std::size_t turns = 1 + rng_.below(3);
      sample.history = make_history(turns, Speaker::kSpeaker1, false, persona);
      samples.push_back(std::move(sample));
    }
    return samples;
  }

  std::vector<EditCase> make_cases(std::size_t count) {
    std::vector<EditCase> cases;
    cases.reserve(count);
    while (cases.size() < count) {
      const Sentence& target = editing_targets_[rng_.below(editing_targets_.size())];
      // The original response realizes the opposing sentence.
      Sentence original{target.pred == kPredLike ? kPredHate : kPredLike, target.value};

      EditCase c;
      c.editing_persona.push_back(render(target, false));
      std::vector<Sentence> persona_struct{target};
      if (rng_.bernoulli(0.08)) {
        // A second, neutral sentence drawn from the reserved pool so the
        // value marginal of training draws stays untouched.
        for (int attempt = 0; attempt < 16; ++attempt) {
          const Sentence& extra = editing_targets_[rng_.below(editing_targets_.size())];
          if (extra.value != target.value && !contradicts(extra, target) &&
              !(extra == target)) {
            c.editing_persona.push_back(render(extra, false));
            persona_struct.push_back(extra);
            break;
          }
        }
      }

      Words realized = render(original, true);
      std::vector<Words> fillers;
      std::size_t n_fillers = 1 + rng_.below(2);
      for (std::size_t i = 0; i < n_fillers; ++i) {
        fillers.push_back(filler_sentences()[rng_.below(filler_sentences().size())]);
      }
      // Original response: realization at a random slot among the fillers.
      std::vector<Words> sentences = fillers;
      std::size_t pos = rng_.below(sentences.size() + 1);
      sentences.insert(sentences.begin() + static_cast<std::ptrdiff_t>(pos), realized);
      c.original_response.clear();
      for (const auto& s : sentences) {
        c.original_response.insert(c.original_response.end(), s.begin(), s.end());
      }

      // Responder turns are fillers so the history never blocks the edit.
      std::size_t turns = 1 + rng_.below(3);
      c.history = make_history(turns, Speaker::kSpeaker1, true, persona_struct);

      // Three rule-edited references.
      Words target_sentence = render(target, true);
      Words ref1;  // in-place replacement
      for (std::size_t i = 0; i < sentences.size(); ++i) {
        const Words& s = i == pos ? target_sentence : sentences[i];
        ref1.insert(ref1.end(), s.begin(), s.end());
      }
      Words ref2;  // contradiction dropped, persona appended
      for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (i == pos) continue;
        ref2.insert(ref2.end(), sentences[i].begin(), sentences[i].end());
      }
      ref2.insert(ref2.end(), target_sentence.begin(), target_sentence.end());
      Words ref3 = ref1;  // replacement plus the extra sentence, when present
      if (persona_struct.size() > 1) {
        Words extra_sentence = render(persona_struct[1], true);
        ref3.insert(ref3.end(), extra_sentence.begin(), extra_sentence.end());
      }
      c.references = {ref1, ref2, ref3};
      cases.push_back(std::move(c));
    }
    return cases;
  }

  Rng rng_;
  SyntheticSizes sizes_;
  double leak_rate_;
  nli::SlotLexicon lexicon_;
  std::vector<std::string> all_values_;
  std::set<Sentence> editing_pool_;
  std::vector<Sentence> editing_targets_;
};

}  // namespace

nli::SlotLexicon builtin_lexicon() {
  std::vector<nli::SlotPredicate> predicates = {
      {"like", {"like"}, "topic", false, "hate"},
      {"hate", {"hate"}, "topic", false, "like"},
      {"own", {"own"}, "item", false, ""},
      {"work", {"work", "as"}, "job", true, ""},
  };
  std::vector<nli::SlotCategory> categories = {
      {"topic", topic_values()},
      {"item", item_values()},
      {"job", job_values()},
  };
  return nli::SlotLexicon(std::move(predicates), std::move(categories));
}

SyntheticCorpus generate_synthetic_corpus(std::uint64_t grammar_seed, SyntheticSizes sizes,
                                          double leak_rate) {
  if (sizes.train == 0 || sizes.valid == 0 || sizes.test == 0) {
    throw PreconditionError("synthetic sizes must be positive");
  }
  Generator gen(grammar_seed, sizes, leak_rate);
  return gen.run();
}

SyntheticPaths write_synthetic_corpus(const SyntheticCorpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  SyntheticPaths paths;
  paths.train = dir + "/train.jsonl";
  paths.valid = dir + "/valid.jsonl";
  paths.valid_cases = dir + "/valid_cases.jsonl";
  paths.test_cases = dir + "/test_cases.jsonl";
  paths.lexicon = dir + "/lexicon.json";
  write_training_corpus(paths.train, corpus.train);
  write_training_corpus(paths.valid, corpus.valid);
  write_edit_cases(paths.valid_cases, corpus.valid_cases);
  write_edit_cases(paths.test_cases, corpus.test_cases);
  corpus.lexicon.save(paths.lexicon);
  return paths;
}

}  // namespace gme::corpus
