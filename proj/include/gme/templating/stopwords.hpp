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

#ifndef GME_TEMPLATING_STOPWORDS_HPP_
#define GME_TEMPLATING_STOPWORDS_HPP_

#include <set>
#include <string>

namespace gme::templating {

// The NLTK English stopword list, compiled in as the shipped asset.
// Punctuation is matched by rule, not by this list.
const std::set<std::string>& english_stopwords();

}  // namespace gme::templating

#endif  // GME_TEMPLATING_STOPWORDS_HPP_
