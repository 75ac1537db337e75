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

#include "gme/templating/ops.hpp"

#include <cmath>
#include <unordered_set>

#include "gme/common/error.hpp"

namespace gme::templating {

Words Template::literal_words() const {
  Words out;
  for (const auto& seg : segments) {
    if (!seg.is_mask) out.insert(out.end(), seg.words.begin(), seg.words.end());
  }
  return out;
}

Words Template::render_words() const {
  Words out;
  for (const auto& seg : segments) {
    if (seg.is_mask) {
      out.push_back(kMaskSpanToken);
    } else {
      out.insert(out.end(), seg.words.begin(), seg.words.end());
    }
  }
  return out;
}

std::string Template::render() const { return join_words(render_words()); }

std::size_t Template::mask_count() const {
  std::size_t n = 0;
  for (const auto& seg : segments) n += seg.is_mask ? 1 : 0;
  return n;
}

bool Template::operator==(const Template& other) const {
  if (source_length != other.source_length ||
      deleted_sentence_indices != other.deleted_sentence_indices ||
      segments.size() != other.segments.size()) {
    return false;
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].is_mask != other.segments[i].is_mask ||
        segments[i].words != other.segments[i].words) {
      return false;
    }
  }
  return true;
}

std::string rule_lemma(const std::string& word) {
  static const std::vector<std::string> suffixes = {"ing", "ed", "es", "s", "d"};
  std::string w = to_lower(word);
  for (const auto& sfx : suffixes) {
    if (w.size() > sfx.size() + 2 && w.ends_with(sfx)) {
      w.resize(w.size() - sfx.size());
      break;
    }
  }
  if (w.size() > 3 && w.back() == 'e') w.pop_back();
  return w;
}

IndexSet overlap_set(const Words& response, const std::vector<Words>& persona,
                     const Lemmatizer& lemmatize) {
  std::unordered_set<std::string> persona_lemmas;
  for (const auto& sentence : persona) {
    for (const auto& word : sentence) persona_lemmas.insert(lemmatize(word));
  }
  IndexSet out;
  for (std::size_t i = 0; i < response.size(); ++i) {
    if (persona_lemmas.count(lemmatize(response[i]))) out.insert(i);
  }
  return out;
}

IndexSet stopword_set(const Words& response, const std::set<std::string>& stoplist) {
  IndexSet out;
  for (std::size_t i = 0; i < response.size(); ++i) {
    if (stoplist.count(response[i]) || is_punct_word(response[i])) out.insert(i);
  }
  return out;
}

TokenMaskVector target_mask_vector(const Words& response, const IndexSet& gradient_indices,
                                   const IndexSet& overlap_indices,
                                   const IndexSet& stopword_indices) {
  auto check = [&](const IndexSet& s, const char* name) {
    if (!s.empty() && *s.rbegin() >= response.size()) {
      throw PreconditionError(std::string(name) + " index out of range");
    }
  };
  check(gradient_indices, "gradient");
  check(overlap_indices, "overlap");
  check(stopword_indices, "stopword");

  TokenMaskVector mask;
  mask.labels.assign(response.size(), 0);
  for (std::size_t i = 0; i < response.size(); ++i) {
    bool related = gradient_indices.count(i) || overlap_indices.count(i);
    if (related && !stopword_indices.count(i)) mask.labels[i] = 1;
  }
  return mask;
}

std::vector<std::pair<std::size_t, std::size_t>> merge_spans(const TokenMaskVector& labels) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t i = 0;
  while (i < labels.labels.size()) {
    if (!labels.labels[i]) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    while (i < labels.labels.size() && labels.labels[i]) ++i;
    spans.emplace_back(begin, i);
  }
  return spans;
}

std::vector<double> keep_count_distribution(std::size_t l, double tau) {
  if (tau <= 0.0) throw PreconditionError("tau must be positive");
  std::vector<double> p(l);
  double total = 0.0;
  for (std::size_t n = 0; n < l; ++n) {
    p[n] = std::exp(-static_cast<double>(n) / tau);
    total += p[n];
  }
  for (auto& v : p) v /= total;
  return p;
}

namespace {

// Builds segments from per-word mask flags, skipping deleted sentences and
// merging masks that end up adjacent in the remaining stream.
Template assemble_template(const Words& response,
                           const std::vector<std::pair<std::size_t, std::size_t>>& sentences,
                           const std::vector<std::uint8_t>& masked,
                           const std::set<std::size_t>& deleted) {
  Template t;
  t.source_length = response.size();
  t.deleted_sentence_indices.assign(deleted.begin(), deleted.end());

  Words literal_run;
  auto flush_literal = [&] {
    if (!literal_run.empty()) {
      t.segments.push_back(TemplateSegment::literal(std::move(literal_run)));
      literal_run = {};
    }
  };
  bool in_mask = false;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    if (deleted.count(s)) continue;
    for (std::size_t i = sentences[s].first; i < sentences[s].second; ++i) {
      if (masked[i]) {
        if (!in_mask) {
          flush_literal();
          t.segments.push_back(TemplateSegment::mask());
          in_mask = true;
        }
      } else {
        in_mask = false;
        literal_run.push_back(response[i]);
      }
    }
  }
  flush_literal();
  return t;
}

}  // namespace

Template sample_training_template(const Words& response, const TokenMaskVector& mask,
                                  const TemplateSamplerConfig& config, Rng& rng) {
  if (mask.labels.size() != response.size()) {
    throw PreconditionError("mask length does not match response length");
  }
  auto sentences = segment_sentences(response);

  std::vector<std::size_t> persona_related;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    for (std::size_t i = sentences[s].first; i < sentences[s].second; ++i) {
      if (mask.labels[i]) {
        persona_related.push_back(s);
        break;
      }
    }
  }

  std::set<std::size_t> deleted;
  std::vector<std::uint8_t> masked(mask.labels.begin(), mask.labels.end());
  if (!persona_related.empty()) {
    auto dist = keep_count_distribution(persona_related.size(), config.tau);
    double u = rng.real01();
    std::size_t keep = 0;
    double cum = 0.0;
    for (std::size_t n = 0; n < dist.size(); ++n) {
      cum += dist[n];
      if (u < cum) {
        keep = n;
        break;
      }
    }
    std::vector<std::size_t> order = persona_related;
    rng.shuffle(order);
    for (std::size_t k = keep; k < order.size(); ++k) deleted.insert(order[k]);

    // Robustness noise inside the kept persona-related sentences.
    for (std::size_t k = 0; k < keep; ++k) {
      std::size_t s = order[k];
      for (std::size_t i = sentences[s].first; i < sentences[s].second; ++i) {
        if (rng.bernoulli(config.noise_rate)) masked[i] = 1;
      }
    }
  }

  return assemble_template(response, sentences, masked, deleted);
}

Template build_inference_template(const Words& original_response,
                                  const TokenMaskVector& decisions,
                                  const std::vector<Words>& editing_persona,
                                  const std::vector<corpus::DialogueTurn>& history,
                                  double epsilon) {
  if (!decisions.confidences.has_value()) {
    throw PreconditionError("inference masking requires classifier confidences");
  }
  const auto& conf = *decisions.confidences;
  if (conf.size() != original_response.size()) {
    throw PreconditionError("confidence length does not match response length");
  }

  std::unordered_set<std::string> protected_words;
  for (const auto& sentence : editing_persona) {
    for (const auto& w : sentence) protected_words.insert(to_lower(w));
  }
  for (const auto& turn : history) {
    for (const auto& w : turn.text) protected_words.insert(to_lower(w));
  }

  std::vector<std::uint8_t> masked(original_response.size(), 0);
  for (std::size_t i = 0; i < original_response.size(); ++i) {
    if (conf[i] > epsilon && !protected_words.count(to_lower(original_response[i]))) {
      masked[i] = 1;
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> whole{{0, original_response.size()}};
  Template t = assemble_template(original_response, whole, masked, {});

  // Invariant: masked words never occur in the persona or the history.
  for (std::size_t i = 0; i < masked.size(); ++i) {
    if (masked[i] && protected_words.count(to_lower(original_response[i]))) {
      throw Error("inference template masked a protected word: " + original_response[i]);
    }
  }
  return t;
}

}  // namespace gme::templating
