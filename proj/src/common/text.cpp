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

#include "gme/common/text.hpp"

#include <cctype>
#include <sstream>

namespace gme {

Words split_words(const std::string& text) {
  Words out;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string join_words(const Words& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::string to_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_punct_word(const std::string& word) {
  if (word.empty()) return false;
  for (char c : word) {
    if (!std::ispunct(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

bool ends_sentence(const std::string& word) {
  if (word.empty()) return false;
  char last = word.back();
  return last == '.' || last == '!' || last == '?';
}

std::vector<std::pair<std::size_t, std::size_t>> segment_sentences(
    const Words& words) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (ends_sentence(words[i])) {
      ranges.emplace_back(begin, i + 1);
      begin = i + 1;
    }
  }
  if (begin < words.size()) ranges.emplace_back(begin, words.size());
  return ranges;
}

std::string normalize_persona_sentence(const Words& sentence) {
  Words low;
  low.reserve(sentence.size());
  for (const auto& w : sentence) low.push_back(to_lower(w));
  while (!low.empty() && is_punct_word(low.back())) low.pop_back();
  if (!low.empty()) {
    std::string& last = low.back();
    while (!last.empty() && (last.back() == '.' || last.back() == '!' || last.back() == '?')) {
      last.pop_back();
    }
    if (last.empty()) low.pop_back();
  }
  return join_words(low);
}

std::string normalize_persona_sentence(const std::string& sentence) {
  return normalize_persona_sentence(split_words(to_lower(sentence)));
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace gme
