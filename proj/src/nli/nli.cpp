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

#include "gme/nli/nli.hpp"

#include "gme/common/error.hpp"
#include "gme/common/subprocess.hpp"

namespace gme::nli {

std::string label_name(NliLabel label) {
  switch (label) {
    case NliLabel::kEntailment:
      return "entailment";
    case NliLabel::kNeutral:
      return "neutral";
    case NliLabel::kContradiction:
      return "contradiction";
  }
  return "neutral";
}

NliLabel parse_label(const std::string& name) {
  if (name == "entailment") return NliLabel::kEntailment;
  if (name == "neutral") return NliLabel::kNeutral;
  if (name == "contradiction") return NliLabel::kContradiction;
  throw BackendError("unknown NLI label: \"" + name + "\"");
}

double map_label(NliLabel label) {
  switch (label) {
    case NliLabel::kEntailment:
      return 0.5;
    case NliLabel::kNeutral:
      return 0.0;
    case NliLabel::kContradiction:
      return -0.5;
  }
  return 0.0;
}

std::vector<NliLabel> NliBackend::classify_batch(
    const std::vector<std::pair<Words, Words>>& pairs) const {
  std::vector<NliLabel> out;
  out.reserve(pairs.size());
  for (const auto& [premise, hypothesis] : pairs) {
    out.push_back(classify(premise, hypothesis));
  }
  return out;
}

NliLabel RuleOracle::classify(const Words& premise, const Words& hypothesis) const {
  if (premise.empty() || hypothesis.empty()) {
    throw PreconditionError("nli classify requires non-empty premise and hypothesis");
  }
  auto parsed = lexicon_.parse_persona_sentence(hypothesis);
  if (!parsed) return NliLabel::kNeutral;
  const auto& predicates = lexicon_.predicates();
  const auto& hyp_pred = predicates[parsed->predicate_index];

  auto realized = lexicon_.find_realizations(premise);
  bool contradiction = false;
  for (const auto& r : realized) {
    const auto& pred = predicates[r.predicate_index];
    if (r.predicate_index == parsed->predicate_index && r.value == parsed->value) {
      return NliLabel::kEntailment;
    }
    if (pred.name == hyp_pred.opposing && r.value == parsed->value) {
      contradiction = true;
    }
    if (r.predicate_index == parsed->predicate_index && hyp_pred.exclusive &&
        r.value != parsed->value) {
      contradiction = true;
    }
  }
  return contradiction ? NliLabel::kContradiction : NliLabel::kNeutral;
}

NliLabel ExternalNliBackend::classify(const Words& premise, const Words& hypothesis) const {
  return classify_batch({{premise, hypothesis}}).front();
}

std::vector<NliLabel> ExternalNliBackend::classify_batch(
    const std::vector<std::pair<Words, Words>>& pairs) const {
  for (const auto& [premise, hypothesis] : pairs) {
    if (premise.empty() || hypothesis.empty()) {
      throw PreconditionError("nli classify requires non-empty premise and hypothesis");
    }
  }
  std::vector<std::string> requests;
  requests.reserve(pairs.size());
  for (const auto& [premise, hypothesis] : pairs) {
    requests.push_back(join_words(premise) + "\t" + join_words(hypothesis));
  }
  std::lock_guard<std::mutex> lock(mutex_);
  auto responses = run_line_protocol(command_, requests);
  std::vector<NliLabel> labels;
  labels.reserve(responses.size());
  for (const auto& line : responses) labels.push_back(parse_label(line));
  return labels;
}

std::unique_ptr<NliBackend> make_backend(const NliBackendDescriptor& descriptor) {
  switch (descriptor.kind) {
    case NliBackendDescriptor::Kind::kRuleOracle:
      if (descriptor.resource.empty()) {
        throw ConfigError("rule-oracle backend requires a lexicon path");
      }
      return std::make_unique<RuleOracle>(SlotLexicon::load(descriptor.resource));
    case NliBackendDescriptor::Kind::kExternalModel:
      if (descriptor.resource.empty()) {
        throw ConfigError("external-model backend requires a command");
      }
      return std::make_unique<ExternalNliBackend>(descriptor.resource);
  }
  throw ConfigError("unknown NLI backend kind");
}

}  // namespace gme::nli
