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

#ifndef GME_CORPUS_IO_HPP_
#define GME_CORPUS_IO_HPP_

#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gme/corpus/types.hpp"

namespace gme::corpus {

// One reported malformed line.
struct LineError {
  std::size_t line_number = 0;  // 1-based
  std::string message;
};

// Streaming reader over line-delimited training records. Malformed lines are
// skipped and recorded; once more than 1% of the lines seen are malformed the
// reader aborts with a SchemaError (checked per line and again at EOF).
class TrainingCorpusReader {
 public:
  explicit TrainingCorpusReader(const std::string& path);

  // Next well-formed sample in file order, or nullopt at EOF.
  std::optional<DialogueSample> next();

  const std::vector<LineError>& errors() const { return errors_; }
  std::size_t lines_seen() const { return lines_seen_; }
  std::size_t malformed_count() const { return malformed_; }

  static constexpr std::size_t kMaxReportedErrors = 50;

 private:
  void note_error(std::size_t line, const std::string& message);
  void check_ratio(bool at_eof);

  std::ifstream in_;
  std::string path_;
  std::vector<LineError> errors_;
  std::size_t lines_seen_ = 0;
  std::size_t malformed_ = 0;
};

std::vector<DialogueSample> load_training_corpus(const std::string& path);
std::vector<EditCase> load_edit_cases(const std::string& path);

void write_training_corpus(const std::string& path,
                           const std::vector<DialogueSample>& samples);
void write_edit_cases(const std::string& path,
                      const std::vector<EditCase>& cases);

// Single-record (de)serialization, exposed for tools and tests.
std::string training_record_to_json(const DialogueSample& sample);
DialogueSample training_record_from_json(const std::string& line);
std::string edit_case_to_json(const EditCase& c);
EditCase edit_case_from_json(const std::string& line);

}  // namespace gme::corpus

#endif  // GME_CORPUS_IO_HPP_
