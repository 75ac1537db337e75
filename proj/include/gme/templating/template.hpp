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

#ifndef GME_TEMPLATING_TEMPLATE_HPP_
#define GME_TEMPLATING_TEMPLATE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gme/common/text.hpp"

namespace gme::templating {

// Placeholder word for a masked span in the rendered text form.
inline constexpr const char* kMaskSpanToken = "[MASK-SPAN]";

// Per-response-word binary labels m_i; confidences present iff produced by
// the mask classifier.
struct TokenMaskVector {
  std::vector<std::uint8_t> labels;
  std::optional<std::vector<double>> confidences;

  std::size_t size() const { return labels.size(); }
};

struct TemplateSegment {
  bool is_mask = false;
  Words words;  // empty for mask segments

  static TemplateSegment mask() { return {true, {}}; }
  static TemplateSegment literal(Words w) { return {false, std::move(w)}; }
};

// A response with persona-related spans replaced by placeholders and, at
// training time, whole persona-related sentences possibly deleted.
struct Template {
  std::vector<TemplateSegment> segments;
  std::size_t source_length = 0;
  std::vector<std::size_t> deleted_sentence_indices;

  Words literal_words() const;
  // Text form: literals in order, each masked span as one [MASK-SPAN] word.
  Words render_words() const;
  std::string render() const;
  std::size_t mask_count() const;
  bool operator==(const Template& other) const;
};

struct TemplateSamplerConfig {
  double delta = 3.0;       // saliency threshold
  double tau = 1.0;         // sentence-deletion temperature
  double noise_rate = 0.15; // extra mask rate inside kept persona sentences
  std::uint64_t rng_seed = 0;
};

// Mask-inference thresholds: main experiment vs. transfer setting.
inline constexpr double kEpsilonMain = 0.5;
inline constexpr double kEpsilonTransfer = 0.75;

}  // namespace gme::templating

#endif  // GME_TEMPLATING_TEMPLATE_HPP_
