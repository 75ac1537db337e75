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
//
// Independent test oracles. These deliberately re-derive results with
// different algorithms than the library (plain recursion, a line-by-line
// transliteration of the multi-bleu script) so agreement is meaningful.

#ifndef GME_TESTS_TEST_ORACLES_HPP_
#define GME_TESTS_TEST_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "gme/common/error.hpp"
#include "gme/common/text.hpp"

namespace test_oracles {

// Exponential-time textbook recursion.
inline std::size_t med_recursive(const gme::Words& a, const gme::Words& b,
                                 std::size_t i = 0, std::size_t j = 0) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  if (a[i] == b[j]) return med_recursive(a, b, i + 1, j + 1);
  std::size_t del = med_recursive(a, b, i + 1, j);
  std::size_t ins = med_recursive(a, b, i, j + 1);
  std::size_t sub = med_recursive(a, b, i + 1, j + 1);
  return 1 + std::min({del, ins, sub});
}

// Transliteration of the multi-bleu perl script's accounting.
inline double multi_bleu_perl(const std::vector<gme::Words>& hypotheses,
                              const std::vector<std::vector<gme::Words>>& references) {
  double correct[5] = {0, 0, 0, 0, 0};
  double total[5] = {0, 0, 0, 0, 0};
  double length_translation = 0;
  double length_reference = 0;

  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto& words = hypotheses[s];
    double hyp_length = static_cast<double>(words.size());
    length_translation += hyp_length;

    double closest_diff = 9e9;
    double closest_length = 9e9;
    std::map<std::string, std::map<int, double>> ref_ngram;  // ngram -> n -> max count
    for (const auto& reference : references[s]) {
      double length = static_cast<double>(reference.size());
      double diff = std::fabs(length - hyp_length);
      if (diff < closest_diff) {
        closest_diff = diff;
        closest_length = length;
      } else if (diff == closest_diff) {
        if (length < closest_length) closest_length = length;
      }
      for (int n = 1; n <= 4; ++n) {
        std::map<std::string, double> ref_ngram_n;
        for (std::size_t start = 0; start + n <= reference.size(); ++start) {
          std::string ngram = std::to_string(n) + " ";
          for (int w = 0; w < n; ++w) ngram += reference[start + w] + " ";
          ref_ngram_n[ngram] += 1;
        }
        for (const auto& [ngram, count] : ref_ngram_n) {
          auto& slot = ref_ngram[ngram][n];
          slot = std::max(slot, count);
        }
      }
    }
    length_reference += closest_length;

    for (int n = 1; n <= 4; ++n) {
      std::map<std::string, double> t_ngram;
      for (std::size_t start = 0; start + n <= words.size(); ++start) {
        std::string ngram = std::to_string(n) + " ";
        for (int w = 0; w < n; ++w) ngram += words[start + w] + " ";
        t_ngram[ngram] += 1;
      }
      for (const auto& [ngram, count] : t_ngram) {
        total[n] += count;
        auto it = ref_ngram.find(ngram);
        if (it != ref_ngram.end()) {
          double ref_count = it->second.count(n) ? it->second[n] : 0;
          correct[n] += std::min(ref_count, count);
        }
      }
    }
  }

  auto my_log = [](double x) { return x <= 0 ? -9999999999.0 : std::log(x); };
  double brevity_penalty = 1.0;
  if (length_translation < length_reference && length_translation > 0) {
    brevity_penalty = std::exp(1.0 - length_reference / length_translation);
  }
  // The perl script divides blindly; corpora too short for 4-grams are outside
  // its domain. Both implementations pin that case to zero.
  for (int n = 1; n <= 4; ++n) {
    if (total[n] == 0) return 0.0;
  }
  double bleu = brevity_penalty *
                std::exp((my_log(correct[1] / total[1]) + my_log(correct[2] / total[2]) +
                          my_log(correct[3] / total[3]) + my_log(correct[4] / total[4])) /
                         4.0);
  return 100.0 * bleu;
}

inline bool is_subsequence(const gme::Words& needle, const gme::Words& haystack) {
  std::size_t i = 0;
  for (const auto& w : haystack) {
    if (i < needle.size() && needle[i] == w) ++i;
  }
  return i == needle.size();
}

inline std::size_t lcs_length(const gme::Words& a, const gme::Words& b) {
  std::vector<std::vector<std::size_t>> dp(a.size() + 1,
                                           std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      dp[i][j] = a[i - 1] == b[j - 1] ? dp[i - 1][j - 1] + 1
                                      : std::max(dp[i - 1][j], dp[i][j - 1]);
    }
  }
  return dp[a.size()][b.size()];
}

}  // namespace test_oracles

#endif  // GME_TESTS_TEST_ORACLES_HPP_
