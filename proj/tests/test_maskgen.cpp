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

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "gme/common/error.hpp"
#include "gme/common/rng.hpp"
#include "gme/corpus/synthetic.hpp"
#include "gme/maskgen/maskgen.hpp"
#include "gme/templating/ops.hpp"
#include "gme/templating/stopwords.hpp"

using namespace gme;
using namespace gme::maskgen;

namespace {

MaskgenConfig tiny_config() {
  MaskgenConfig cfg;
  cfg.core.n_ctx = 64;
  cfg.core.d_model = 32;
  cfg.core.n_layers = 2;
  cfg.core.n_heads = 2;
  cfg.core.d_ff = 64;
  cfg.core.causal = false;
  cfg.train.batch_size = 16;
  cfg.train.learning_rate = 3e-3;
  cfg.train.max_steps = 500;
  cfg.train.eval_interval = 125;
  cfg.train.seed = 77;
  cfg.train.threads = 2;
  return cfg;
}

// Overlap-based targets, the deterministic part of the mask definition.
templating::TokenMaskVector overlap_target(const corpus::DialogueSample& s) {
  auto over = templating::overlap_set(s.response, s.persona);
  auto stops = templating::stopword_set(s.response, templating::english_stopwords());
  return templating::target_mask_vector(s.response, {}, over, stops);
}

struct Trained {
  std::unique_ptr<MaskTagger> tagger;
  corpus::SyntheticCorpus synthetic;
  std::vector<templating::TokenMaskVector> train_targets, valid_targets;
};

const Trained& trained() {
  static Trained t = [] {
    Trained out;
    out.synthetic = corpus::generate_synthetic_corpus(606, {400, 60, 10});
    for (const auto& s : out.synthetic.train) out.train_targets.push_back(overlap_target(s));
    for (const auto& s : out.synthetic.valid) out.valid_targets.push_back(overlap_target(s));
    auto freq = class_frequencies(out.train_targets);
    out.tagger = train_mask_classifier(out.synthetic.train, out.train_targets,
                                       out.synthetic.valid, out.valid_targets, freq,
                                       tiny_config());
    return out;
  }();
  return t;
}

}  // namespace

TEST_CASE("class frequencies and inverse weights") {
  std::vector<templating::TokenMaskVector> targets(1);
  targets[0].labels.assign(100, 0);
  for (int i = 0; i < 10; ++i) targets[0].labels[static_cast<std::size_t>(i * 7)] = 1;
  auto f = class_frequencies(targets);
  CHECK(f.f_positive == doctest::Approx(0.1));
  CHECK(f.f_negative == doctest::Approx(0.9));
  CHECK(f.weight(true) == doctest::Approx(10.0));
  CHECK(f.weight(false) == doctest::Approx(1.0 / 0.9));

  templating::TokenMaskVector all_ones;
  all_ones.labels.assign(5, 1);
  CHECK_THROWS_AS(class_frequencies({all_ones}), ConfigError);
  CHECK_THROWS_AS(class_frequencies({}), ConfigError);
}

TEST_CASE("class frequencies equal a brute-force recount on synthetic targets") {
  auto synthetic = corpus::generate_synthetic_corpus(19, {80, 10, 5});
  std::vector<templating::TokenMaskVector> targets;
  for (const auto& s : synthetic.train) targets.push_back(overlap_target(s));
  auto f = class_frequencies(targets);
  std::size_t pos = 0, total = 0;
  for (const auto& t : targets) {
    for (auto l : t.labels) {
      pos += l;
      ++total;
    }
  }
  CHECK(f.f_positive == doctest::Approx(static_cast<double>(pos) / total).epsilon(1e-12));
  CHECK(f.f_positive + f.f_negative == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("encoding has no persona segment and aligns with response words") {
  auto synthetic = corpus::generate_synthetic_corpus(23, {30, 5, 5});
  ClassFrequencies freq{0.3, 0.7};
  MaskgenConfig cfg = tiny_config();
  std::vector<Words> sources;
  for (const auto& s : synthetic.train) {
    sources.push_back(s.response);
    for (const auto& t : s.history) sources.push_back(t.text);
  }
  cfg.core.vocab_size = 0;
  model::Vocabulary vocab = model::Vocabulary::build(sources);
  cfg.core.vocab_size = vocab.size();
  MaskTagger tagger(cfg.core, vocab, freq, 3);

  for (const auto& s : synthetic.train) {
    auto enc = tagger.encode(s.history, s.response);
    CHECK(enc.response_word_positions.size() == s.response.size());
    for (int t : enc.example.type_ids) {
      CHECK(t != static_cast<int>(model::TokenType::kPersona));
      CHECK(t != static_cast<int>(model::TokenType::kTemplate));
    }
  }
}

TEST_CASE("untrained tagger confidences are exactly one half") {
  model::Vocabulary vocab = model::Vocabulary::build({split_words("a b c d e")});
  MaskgenConfig cfg = tiny_config();
  cfg.core.vocab_size = vocab.size();
  MaskTagger tagger(cfg.core, vocab, {0.4, 0.6}, 5);
  auto decision = tagger.predict({}, split_words("a b c"));
  REQUIRE(decision.confidences.size() == 3);
  for (double c : decision.confidences) {
    CHECK(c == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::fabs(c - 0.5) < 0.1);
  }
}

TEST_CASE("weighted loss matches the hand-computed formula to 1e-9") {
  model::Vocabulary vocab = model::Vocabulary::build({split_words("a b c d e f")});
  MaskgenConfig cfg = tiny_config();
  cfg.core.vocab_size = vocab.size();
  ClassFrequencies freq{0.25, 0.75};
  MaskTagger tagger(cfg.core, vocab, freq, 99);

  Words response = split_words("a b c");
  templating::TokenMaskVector target;
  target.labels = {1, 0, 1};
  auto enc = tagger.encode({}, response);
  model::Workspace ws;
  double loss = tagger.example_loss(enc, target, ws);

  // Hand recomputation from the predicted confidences.
  auto decision = tagger.predict({}, response);
  double expected = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    double p = decision.confidences[i];
    bool positive = target.labels[i] != 0;
    double w = positive ? 1.0 / freq.f_positive : 1.0 / freq.f_negative;
    expected += -w * std::log(positive ? p : 1.0 - p);
  }
  CHECK(loss == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("balanced frequencies reduce to a constant multiple of the unweighted loss") {
  model::Vocabulary vocab = model::Vocabulary::build({split_words("a b c d e f")});
  MaskgenConfig cfg = tiny_config();
  cfg.core.vocab_size = vocab.size();
  MaskTagger tagger(cfg.core, vocab, {0.5, 0.5}, 4);

  Words response = split_words("a b c d");
  templating::TokenMaskVector target;
  target.labels = {1, 0, 0, 1};
  auto enc = tagger.encode({}, response);
  model::Workspace ws;
  double weighted = tagger.example_loss(enc, target, ws);
  auto decision = tagger.predict({}, response);
  double unweighted = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double p = decision.confidences[i];
    unweighted += -std::log(target.labels[i] ? p : 1.0 - p);
  }
  CHECK(weighted == doctest::Approx(2.0 * unweighted).epsilon(1e-12));
}

TEST_CASE("weighted class mass balances on corpus-distributed batches") {
  // Draw 10,000 token labels from the corpus distribution and compare the
  // weighted positive and negative mass.
  auto synthetic = corpus::generate_synthetic_corpus(47, {200, 20, 5});
  std::vector<templating::TokenMaskVector> targets;
  for (const auto& s : synthetic.train) targets.push_back(overlap_target(s));
  auto freq = class_frequencies(targets);

  std::vector<std::uint8_t> all_labels;
  for (const auto& t : targets) {
    all_labels.insert(all_labels.end(), t.labels.begin(), t.labels.end());
  }
  Rng rng(1000);
  double pos_mass = 0.0, neg_mass = 0.0;
  for (int i = 0; i < 10000; ++i) {
    std::uint8_t label = all_labels[rng.below(all_labels.size())];
    if (label) {
      pos_mass += freq.weight(true);
    } else {
      neg_mass += freq.weight(false);
    }
  }
  CHECK(pos_mass / neg_mass == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("tagger gradients match finite differences") {
  model::Vocabulary vocab = model::Vocabulary::build({split_words("a b c d e f g h")});
  MaskgenConfig cfg = tiny_config();
  cfg.core.vocab_size = vocab.size();
  cfg.core.d_model = 16;
  cfg.core.d_ff = 32;
  MaskTagger tagger(cfg.core, vocab, {0.3, 0.7}, 12);
  // Give the tag head nonzero weights so the head gradient path is exercised.
  auto& params = tagger.params();
  Rng prng(5);
  for (std::size_t i = params.size() - 17; i < params.size(); ++i) {
    params[i] = 0.05 * prng.gauss();
  }

  Words response = split_words("a b c d");
  templating::TokenMaskVector target;
  target.labels = {1, 0, 1, 0};
  auto enc = tagger.encode({{corpus::Speaker::kSpeaker1, split_words("e f g")}}, response);

  model::Workspace ws;
  std::vector<double> grad(tagger.param_count(), 0.0);
  std::vector<double> embed_grad(enc.example.length() * 16, 0.0);
  tagger.example_loss_and_grad(enc, target, ws, grad.data(), embed_grad.data());

  const double h = 1e-5;
  std::vector<double> offset(embed_grad.size(), 0.0);
  model::Workspace fws;
  double worst = 0.0;
  for (std::size_t idx = 0; idx < offset.size(); ++idx) {
    offset[idx] = h;
    double lp = tagger.example_loss(enc, target, fws, offset.data());
    offset[idx] = -h;
    double lm = tagger.example_loss(enc, target, fws, offset.data());
    offset[idx] = 0.0;
    double fd = (lp - lm) / (2.0 * h);
    double denom = std::max({std::fabs(fd), std::fabs(embed_grad[idx]), 1e-8});
    worst = std::max(worst, std::fabs(fd - embed_grad[idx]) / denom);
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("trained tagger reaches token F1 >= 0.8 on held-out targets") {
  const auto& t = trained();
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < t.synthetic.valid.size(); ++i) {
    const auto& s = t.synthetic.valid[i];
    auto decision = t.tagger->predict(s.history, s.response);
    REQUIRE(decision.confidences.size() == s.response.size());
    for (std::size_t j = 0; j < s.response.size(); ++j) {
      bool predicted = decision.confidences[j] > 0.5;
      bool actual = t.valid_targets[i].labels[j] != 0;
      if (predicted && actual) ++tp;
      if (predicted && !actual) ++fp;
      if (!predicted && actual) ++fn;
    }
  }
  double precision = tp ? static_cast<double>(tp) / (tp + fp) : 0.0;
  double recall = tp ? static_cast<double>(tp) / (tp + fn) : 0.0;
  double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
  MESSAGE("maskgen valid F1 ", f1, " (P ", precision, ", R ", recall, ")");
  CHECK(f1 >= 0.8);
}

TEST_CASE("prediction is deterministic") {
  const auto& t = trained();
  const auto& s = t.synthetic.valid[0];
  auto a = t.tagger->predict(s.history, s.response);
  auto b = t.tagger->predict(s.history, s.response);
  CHECK(a.confidences == b.confidences);
}

TEST_CASE("checkpoint round trip keeps frequencies and confidences") {
  const auto& t = trained();
  auto dir = std::filesystem::temp_directory_path() / "gme-maskgen-ckpt";
  std::filesystem::remove_all(dir);
  t.tagger->save(dir.string());
  auto loaded = MaskTagger::load(dir.string());
  CHECK(loaded->frequencies().f_positive ==
        doctest::Approx(t.tagger->frequencies().f_positive));
  const auto& s = t.synthetic.valid[1];
  CHECK(loaded->predict(s.history, s.response).confidences ==
        t.tagger->predict(s.history, s.response).confidences);
  std::filesystem::remove_all(dir);
}

TEST_CASE("golden confidences from a pinned micro checkpoint") {
  std::string ckpt_dir = std::string(GME_GOLDEN_DIR) + "/micro_maskgen";
  std::string out_path = std::string(GME_GOLDEN_DIR) + "/micro_confidences.json";

  if (std::getenv("GME_REGEN_GOLDEN")) {
    auto synthetic = corpus::generate_synthetic_corpus(71, {80, 10, 5});
    std::vector<templating::TokenMaskVector> targets;
    for (const auto& s : synthetic.train) targets.push_back(overlap_target(s));
    auto freq = class_frequencies(targets);
    MaskgenConfig cfg = tiny_config();
    cfg.train.max_steps = 120;
    cfg.train.eval_interval = 60;
    auto tagger = train_mask_classifier(synthetic.train, targets, {}, {}, freq, cfg);
    std::filesystem::remove_all(ckpt_dir);
    tagger->save(ckpt_dir);
  }

  auto tagger = MaskTagger::load(ckpt_dir);
  Words response = split_words("i like apples . the weather is nice .");
  std::vector<corpus::DialogueTurn> history = {
      {corpus::Speaker::kSpeaker1, split_words("how are you doing ?")}};
  auto decision = tagger->predict(history, response);

  nlohmann::json snapshot = nlohmann::json::array();
  for (double c : decision.confidences) snapshot.push_back(c);
  if (std::getenv("GME_REGEN_GOLDEN")) {
    std::ofstream out(out_path);
    out << snapshot.dump(2) << "\n";
  }
  std::ifstream in(out_path);
  REQUIRE_MESSAGE(in.good(), "golden file missing; regenerate with GME_REGEN_GOLDEN=1");
  nlohmann::json expected;
  in >> expected;
  REQUIRE(expected.size() == decision.confidences.size());
  for (std::size_t i = 0; i < decision.confidences.size(); ++i) {
    CHECK(decision.confidences[i] == doctest::Approx(expected[i].get<double>()).epsilon(1e-6));
  }
}

TEST_CASE("responses over the context raise a length error") {
  model::Vocabulary vocab = model::Vocabulary::build({split_words("a")});
  MaskgenConfig cfg = tiny_config();
  cfg.core.vocab_size = vocab.size();
  cfg.core.n_ctx = 8;
  MaskTagger tagger(cfg.core, vocab, {0.5, 0.5}, 2);
  Words response(10, "a");
  CHECK_THROWS_AS(tagger.predict({}, response), LengthError);
}
