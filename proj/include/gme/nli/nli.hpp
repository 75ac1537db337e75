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

#ifndef GME_NLI_NLI_HPP_
#define GME_NLI_NLI_HPP_

#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "gme/common/text.hpp"
#include "gme/nli/lexicon.hpp"

namespace gme::nli {

enum class NliLabel { kEntailment, kNeutral, kContradiction };

std::string label_name(NliLabel label);
NliLabel parse_label(const std::string& name);  // throws BackendError

// entailment -> +0.5, neutral -> 0.0, contradiction -> -0.5
double map_label(NliLabel label);

// Classifies (premise, hypothesis) pairs. Implementations are safe for
// concurrent classify calls; backends that cannot guarantee this serialize
// internally.
class NliBackend {
 public:
  virtual ~NliBackend() = default;

  // Both inputs must be non-empty.
  virtual NliLabel classify(const Words& premise, const Words& hypothesis) const = 0;

  virtual std::vector<NliLabel> classify_batch(
      const std::vector<std::pair<Words, Words>>& pairs) const;
};

// Exact on the slot-grammar language: a hypothesis realized affirmatively in
// the premise entails; an opposing predicate on the same value, or a
// different value of an exclusive predicate, contradicts; otherwise neutral.
class RuleOracle : public NliBackend {
 public:
  explicit RuleOracle(SlotLexicon lexicon) : lexicon_(std::move(lexicon)) {}

  NliLabel classify(const Words& premise, const Words& hypothesis) const override;

  const SlotLexicon& lexicon() const { return lexicon_; }

 private:
  SlotLexicon lexicon_;
};

// Process-boundary plugin. Batches are written as "premise<TAB>hypothesis"
// request lines; the command reads them on stdin and must answer one label
// line ("entailment" | "neutral" | "contradiction") per request, in order.
class ExternalNliBackend : public NliBackend {
 public:
  explicit ExternalNliBackend(std::string command) : command_(std::move(command)) {}

  NliLabel classify(const Words& premise, const Words& hypothesis) const override;
  std::vector<NliLabel> classify_batch(
      const std::vector<std::pair<Words, Words>>& pairs) const override;

 private:
  std::string command_;
  mutable std::mutex mutex_;
};

struct NliBackendDescriptor {
  enum class Kind { kRuleOracle, kExternalModel };
  Kind kind = Kind::kRuleOracle;
  // Rule oracle: path of the lexicon file. External model: the command line
  // implementing the batch protocol.
  std::string resource;
};

std::unique_ptr<NliBackend> make_backend(const NliBackendDescriptor& descriptor);

}  // namespace gme::nli

#endif  // GME_NLI_NLI_HPP_
