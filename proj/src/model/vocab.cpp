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

#include "gme/model/vocab.hpp"

#include <algorithm>
#include <set>

#include "gme/common/error.hpp"
#include "gme/templating/template.hpp"

namespace gme::model {

namespace {
const std::vector<std::string>& special_words() {
  static const std::vector<std::string> specials = {
      "<pad>", "<unk>", "<sep>", "<eos>", templating::kMaskSpanToken};
  return specials;
}
}  // namespace

Vocabulary::Vocabulary() {
  words_ = special_words();
  for (std::size_t i = 0; i < words_.size(); ++i) {
    index_[words_[i]] = static_cast<int>(i);
  }
}

Vocabulary Vocabulary::build(const std::vector<Words>& sources) {
  std::set<std::string> unique;
  for (const auto& source : sources) {
    for (const auto& w : source) unique.insert(w);
  }
  Vocabulary vocab;
  for (const auto& w : unique) {
    if (vocab.index_.count(w)) continue;  // reserved token spelled in data
    vocab.index_[w] = static_cast<int>(vocab.words_.size());
    vocab.words_.push_back(w);
  }
  return vocab;
}

Vocabulary Vocabulary::from_words(const std::vector<std::string>& words) {
  if (words.size() < kNumSpecials) throw ConfigError("vocabulary word list too short");
  for (int i = 0; i < kNumSpecials; ++i) {
    if (words[i] != special_words()[i]) {
      throw ConfigError("vocabulary word list does not start with the reserved tokens");
    }
  }
  Vocabulary vocab;
  vocab.words_ = words;
  vocab.index_.clear();
  for (std::size_t i = 0; i < words.size(); ++i) {
    vocab.index_[words[i]] = static_cast<int>(i);
  }
  return vocab;
}

int Vocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || id >= size()) throw ConfigError("token id out of range: " + std::to_string(id));
  return words_[static_cast<std::size_t>(id)];
}

bool Vocabulary::has(const std::string& word) const { return index_.count(word) > 0; }

std::uint64_t Vocabulary::hash() const {
  std::string joined;
  for (const auto& w : words_) {
    joined += w;
    joined.push_back('\n');
  }
  return fnv1a64(joined);
}

}  // namespace gme::model
