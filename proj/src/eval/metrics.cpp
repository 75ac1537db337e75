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

#include "gme/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "gme/common/error.hpp"

namespace gme::eval {

std::size_t med(const Words& a, const Words& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> row(m + 1);
  for (std::size_t j = 0; j <= m; ++j) row[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t saved = row[j];
      if (a[i - 1] == b[j - 1]) {
        row[j] = diag;
      } else {
        row[j] = 1 + std::min({row[j - 1], row[j], diag});
      }
      diag = saved;
    }
  }
  return row[m];
}

namespace {

std::map<std::string, std::size_t> bag(const Words& words) {
  std::map<std::string, std::size_t> counts;
  for (const auto& w : words) counts[w] += 1;
  return counts;
}

// |bag(a) \ bag(b)| with multiset semantics.
std::size_t bag_difference_size(const Words& a, const Words& b) {
  auto ca = bag(a);
  auto cb = bag(b);
  std::size_t total = 0;
  for (const auto& [word, count] : ca) {
    auto it = cb.find(word);
    std::size_t other = it == cb.end() ? 0 : it->second;
    total += count > other ? count - other : 0;
  }
  return total;
}

Words concat_sentences(const std::vector<Words>& sentences) {
  Words out;
  for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

}  // namespace

BehavioralStats behavioral_stats(const std::vector<BehavioralPair>& pairs,
                                 bool min_over_persona_sentences) {
  if (pairs.empty()) throw PreconditionError("behavioral_stats: empty pair list");
  BehavioralStats stats;
  for (const auto& p : pairs) {
    stats.add += static_cast<double>(bag_difference_size(p.edited, p.original));
    stats.rm += static_cast<double>(bag_difference_size(p.original, p.edited));
    stats.delta_len += static_cast<double>(p.edited.size()) -
                       static_cast<double>(p.original.size());
    stats.med_to_original += static_cast<double>(med(p.edited, p.original));
    if (min_over_persona_sentences && !p.persona.empty()) {
      std::size_t best = std::numeric_limits<std::size_t>::max();
      for (const auto& s : p.persona) best = std::min(best, med(p.edited, s));
      stats.med_to_persona += static_cast<double>(best);
    } else {
      stats.med_to_persona += static_cast<double>(med(p.edited, concat_sentences(p.persona)));
    }
  }
  double n = static_cast<double>(pairs.size());
  stats.add /= n;
  stats.rm /= n;
  stats.delta_len /= n;
  stats.med_to_original /= n;
  stats.med_to_persona /= n;
  return stats;
}

namespace {

std::string ngram_key(const Words& words, std::size_t start, std::size_t n) {
  std::string key;
  for (std::size_t k = 0; k < n; ++k) {
    if (k) key.push_back('\x1f');
    key += words[start + k];
  }
  return key;
}

}  // namespace

double multi_ref_bleu(const std::vector<Words>& predictions,
                      const std::vector<std::vector<Words>>& references) {
  if (predictions.empty()) throw PreconditionError("multi_ref_bleu: empty prediction set");
  if (predictions.size() != references.size()) {
    throw PreconditionError("multi_ref_bleu: predictions and references misaligned");
  }
  constexpr std::size_t kMaxOrder = 4;
  std::size_t correct[kMaxOrder] = {0, 0, 0, 0};
  std::size_t total[kMaxOrder] = {0, 0, 0, 0};
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;

  for (std::size_t s = 0; s < predictions.size(); ++s) {
    const Words& hyp = predictions[s];
    const auto& refs = references[s];
    if (refs.empty()) {
      throw PreconditionError("multi_ref_bleu: prediction " + std::to_string(s) +
                              " has no references");
    }
    hyp_length += hyp.size();

    // Closest reference length; the shorter one wins ties.
    std::size_t closest = refs[0].size();
    std::size_t closest_diff = std::numeric_limits<std::size_t>::max();
    for (const auto& ref : refs) {
      std::size_t diff = ref.size() > hyp.size() ? ref.size() - hyp.size()
                                                 : hyp.size() - ref.size();
      if (diff < closest_diff || (diff == closest_diff && ref.size() < closest)) {
        closest_diff = diff;
        closest = ref.size();
      }
    }
    ref_length += closest;

    for (std::size_t n = 1; n <= kMaxOrder; ++n) {
      if (hyp.size() < n) break;
      std::map<std::string, std::size_t> max_ref_counts;
      for (const auto& ref : refs) {
        if (ref.size() < n) continue;
        std::map<std::string, std::size_t> counts;
        for (std::size_t i = 0; i + n <= ref.size(); ++i) counts[ngram_key(ref, i, n)] += 1;
        for (const auto& [key, count] : counts) {
          max_ref_counts[key] = std::max(max_ref_counts[key], count);
        }
      }
      std::map<std::string, std::size_t> hyp_counts;
      for (std::size_t i = 0; i + n <= hyp.size(); ++i) hyp_counts[ngram_key(hyp, i, n)] += 1;
      for (const auto& [key, count] : hyp_counts) {
        auto it = max_ref_counts.find(key);
        std::size_t clip = it == max_ref_counts.end() ? 0 : it->second;
        correct[n - 1] += std::min(count, clip);
      }
      total[n - 1] += hyp.size() - n + 1;
    }
  }

  double log_precision_sum = 0.0;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    if (total[n] == 0 || correct[n] == 0) return 0.0;
    log_precision_sum += std::log(static_cast<double>(correct[n]) /
                                  static_cast<double>(total[n]));
  }
  double brevity = 1.0;
  if (hyp_length < ref_length && hyp_length > 0) {
    brevity = std::exp(1.0 - static_cast<double>(ref_length) /
                                 static_cast<double>(hyp_length));
  }
  if (hyp_length == 0) return 0.0;
  return 100.0 * brevity * std::exp(log_precision_sum / kMaxOrder);
}

double unigram_f1(const Words& prediction, const std::vector<Words>& references) {
  if (references.empty()) throw PreconditionError("unigram_f1: no references");
  double best = 0.0;
  auto pred_bag = bag(prediction);
  for (const auto& ref : references) {
    auto ref_bag = bag(ref);
    std::size_t overlap = 0;
    for (const auto& [word, count] : pred_bag) {
      auto it = ref_bag.find(word);
      if (it != ref_bag.end()) overlap += std::min(count, it->second);
    }
    if (overlap == 0 || prediction.empty() || ref.empty()) continue;
    double precision = static_cast<double>(overlap) / static_cast<double>(prediction.size());
    double recall = static_cast<double>(overlap) / static_cast<double>(ref.size());
    double f1 = 2.0 * precision * recall / (precision + recall);
    best = std::max(best, f1);
  }
  return best;
}

double average_score(double bleu, double p_score) { return (bleu + p_score) / 2.0; }

}  // namespace gme::eval
