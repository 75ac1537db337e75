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

#ifndef GME_COMMON_SUBPROCESS_HPP_
#define GME_COMMON_SUBPROCESS_HPP_

#include <string>
#include <vector>

namespace gme {

// Runs `command < requests > responses` through the shell and returns the
// response lines. The batch contract: one response line per request line, in
// order. Throws BackendError on a nonzero exit or a line-count mismatch.
std::vector<std::string> run_line_protocol(const std::string& command,
                                           const std::vector<std::string>& request_lines);

}  // namespace gme

#endif  // GME_COMMON_SUBPROCESS_HPP_
