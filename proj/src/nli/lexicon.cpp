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

#include "gme/nli/lexicon.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "gme/common/error.hpp"

namespace gme::nli {

using nlohmann::json;

SlotLexicon::SlotLexicon(std::vector<SlotPredicate> predicates,
                         std::vector<SlotCategory> categories)
    : predicates_(std::move(predicates)), categories_(std::move(categories)) {
  for (const auto& p : predicates_) {
    category(p.category);  // throws on a dangling category reference
    if (!p.opposing.empty() && !predicate_index(p.opposing)) {
      throw ConfigError("lexicon: predicate \"" + p.name + "\" opposes unknown \"" +
                        p.opposing + "\"");
    }
  }
}

const SlotCategory& SlotLexicon::category(const std::string& name) const {
  for (const auto& c : categories_) {
    if (c.name == name) return c;
  }
  throw ConfigError("lexicon: unknown slot category \"" + name + "\"");
}

std::optional<std::size_t> SlotLexicon::predicate_index(const std::string& name) const {
  for (std::size_t i = 0; i < predicates_.size(); ++i) {
    if (predicates_[i].name == name) return i;
  }
  return std::nullopt;
}

bool SlotLexicon::is_value_of(const std::string& category_name,
                              const std::string& word) const {
  const auto& c = category(category_name);
  return std::find(c.values.begin(), c.values.end(), word) != c.values.end();
}

std::vector<std::string> SlotLexicon::all_values() const {
  std::vector<std::string> out;
  for (const auto& c : categories_) {
    out.insert(out.end(), c.values.begin(), c.values.end());
  }
  return out;
}

std::vector<Realization> SlotLexicon::find_realizations(const Words& words) const {
  std::vector<Realization> found;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i] != "i") continue;
    for (std::size_t p = 0; p < predicates_.size(); ++p) {
      const auto& phrase = predicates_[p].phrase;
      std::size_t end = i + 1 + phrase.size();  // index of the value word
      if (end >= words.size()) continue;
      bool match = true;
      for (std::size_t k = 0; k < phrase.size(); ++k) {
        if (words[i + 1 + k] != phrase[k]) {
          match = false;
          break;
        }
      }
      if (!match) continue;
      const std::string& value = words[end];
      if (is_value_of(predicates_[p].category, value)) {
        found.push_back({p, value, i});
      }
    }
  }
  return found;
}

std::optional<Realization> SlotLexicon::parse_persona_sentence(const Words& sentence) const {
  Words trimmed = sentence;
  while (!trimmed.empty() && is_punct_word(trimmed.back())) trimmed.pop_back();
  auto found = find_realizations(trimmed);
  for (const auto& r : found) {
    // The realization must span the whole sentence.
    if (r.start == 0 && r.start + 1 + predicates_[r.predicate_index].phrase.size() + 1 ==
                            trimmed.size()) {
      return r;
    }
  }
  return std::nullopt;
}

Words SlotLexicon::render_sentence(std::size_t predicate_index, const std::string& value,
                                   bool terminal_period) const {
  const auto& p = predicates_.at(predicate_index);
  Words out{"i"};
  out.insert(out.end(), p.phrase.begin(), p.phrase.end());
  out.push_back(value);
  if (terminal_period) out.push_back(".");
  return out;
}

void SlotLexicon::save(const std::string& path) const {
  json j;
  j["predicates"] = json::array();
  for (const auto& p : predicates_) {
    j["predicates"].push_back({{"name", p.name},
                               {"phrase", p.phrase},
                               {"category", p.category},
                               {"exclusive", p.exclusive},
                               {"opposing", p.opposing}});
  }
  j["categories"] = json::array();
  for (const auto& c : categories_) {
    j["categories"].push_back({{"name", c.name}, {"values", c.values}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write lexicon: " + path);
  out << j.dump(2) << "\n";
}

SlotLexicon SlotLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("invalid lexicon json: ") + e.what());
  }
  std::vector<SlotPredicate> predicates;
  for (const auto& p : j.at("predicates")) {
    predicates.push_back({p.at("name").get<std::string>(),
                          p.at("phrase").get<Words>(),
                          p.at("category").get<std::string>(),
                          p.at("exclusive").get<bool>(),
                          p.at("opposing").get<std::string>()});
  }
  std::vector<SlotCategory> categories;
  for (const auto& c : j.at("categories")) {
    categories.push_back({c.at("name").get<std::string>(),
                          c.at("values").get<std::vector<std::string>>()});
  }
  return SlotLexicon(std::move(predicates), std::move(categories));
}

}  // namespace gme::nli
