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

#ifndef GME_COMMON_TEXT_HPP_
#define GME_COMMON_TEXT_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gme {

// Everything word-level in this codebase is a sequence of lowercased,
// whitespace-free words. Punctuation marks are their own words.
using Words = std::vector<std::string>;

Words split_words(const std::string& text);
std::string join_words(const Words& words);
std::string to_lower(std::string s);

// True if the word consists solely of punctuation characters.
bool is_punct_word(const std::string& word);

// True if the word terminates a sentence (".", "!", "?" or ends with one).
bool ends_sentence(const std::string& word);

// Half-open [begin, end) word ranges, one per sentence. A sequence without
// terminal punctuation is a single sentence.
std::vector<std::pair<std::size_t, std::size_t>> segment_sentences(
    const Words& words);

// Canonical form used for persona-sentence equality: lowercase words with
// terminal punctuation stripped, joined by single spaces.
std::string normalize_persona_sentence(const Words& sentence);
std::string normalize_persona_sentence(const std::string& sentence);

std::uint64_t fnv1a64(const std::string& data);

}  // namespace gme

#endif  // GME_COMMON_TEXT_HPP_
