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

#include "gme/corpus/io.hpp"

#include <json.hpp>

#include "gme/common/error.hpp"

namespace gme::corpus {
namespace {

using nlohmann::json;

Words parse_text_field(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_string()) {
    throw SchemaError(std::string("missing or non-string field \"") + field + "\"");
  }
  Words words = split_words(j[field].get<std::string>());
  if (words.empty()) {
    throw SchemaError(std::string("field \"") + field + "\" is empty");
  }
  return words;
}

std::vector<DialogueTurn> parse_history(const json& j) {
  if (!j.contains("history") || !j["history"].is_array()) {
    throw SchemaError("missing or non-array field \"history\"");
  }
  std::vector<DialogueTurn> history;
  for (const auto& item : j["history"]) {
    if (!item.is_object() || !item.contains("speaker") || !item["speaker"].is_string()) {
      throw SchemaError("history turn missing \"speaker\"");
    }
    DialogueTurn turn;
    turn.speaker = parse_speaker(item["speaker"].get<std::string>());
    turn.text = parse_text_field(item, "text");
    history.push_back(std::move(turn));
  }
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i].speaker == history[i - 1].speaker) {
      throw SchemaError("history speakers do not alternate at turn " + std::to_string(i));
    }
  }
  return history;
}

std::vector<Words> parse_sentence_list(const json& j, const char* field, bool required) {
  if (!j.contains(field)) {
    if (required) throw SchemaError(std::string("missing field \"") + field + "\"");
    return {};
  }
  if (!j[field].is_array()) {
    throw SchemaError(std::string("field \"") + field + "\" is not an array");
  }
  std::vector<Words> out;
  for (const auto& item : j[field]) {
    if (!item.is_string()) {
      throw SchemaError(std::string("field \"") + field + "\" contains a non-string");
    }
    Words words = split_words(item.get<std::string>());
    if (words.empty()) {
      throw SchemaError(std::string("field \"") + field + "\" contains an empty sentence");
    }
    out.push_back(std::move(words));
  }
  return out;
}

json history_to_json(const std::vector<DialogueTurn>& history) {
  json arr = json::array();
  for (const auto& turn : history) {
    arr.push_back({{"speaker", speaker_tag(turn.speaker)}, {"text", join_words(turn.text)}});
  }
  return arr;
}

json sentences_to_json(const std::vector<Words>& sentences) {
  json arr = json::array();
  for (const auto& s : sentences) arr.push_back(join_words(s));
  return arr;
}

}  // namespace

std::string training_record_to_json(const DialogueSample& sample) {
  json j;
  j["history"] = history_to_json(sample.history);
  j["response"] = join_words(sample.response);
  j["persona"] = sentences_to_json(sample.persona);
  return j.dump();
}

DialogueSample training_record_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("invalid json: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("record is not an object");
  DialogueSample sample;
  sample.history = parse_history(j);
  sample.response = parse_text_field(j, "response");
  sample.persona = parse_sentence_list(j, "persona", /*required=*/true);
  if (sample.persona.empty()) {
    throw SchemaError("persona list is empty");
  }
  return sample;
}

std::string edit_case_to_json(const EditCase& c) {
  json j;
  j["history"] = history_to_json(c.history);
  j["original_response"] = join_words(c.original_response);
  j["editing_persona"] = sentences_to_json(c.editing_persona);
  if (!c.references.empty()) j["references"] = sentences_to_json(c.references);
  return j.dump();
}

EditCase edit_case_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("invalid json: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("record is not an object");
  EditCase c;
  c.history = parse_history(j);
  c.original_response = parse_text_field(j, "original_response");
  c.editing_persona = parse_sentence_list(j, "editing_persona", /*required=*/true);
  if (c.editing_persona.empty() || c.editing_persona.size() > 2) {
    throw SchemaError("editing_persona must hold 1 or 2 sentences, got " +
                      std::to_string(c.editing_persona.size()));
  }
  c.references = parse_sentence_list(j, "references", /*required=*/false);
  return c;
}

TrainingCorpusReader::TrainingCorpusReader(const std::string& path)
    : in_(path), path_(path) {
  if (!in_) throw IoError("cannot open training corpus: " + path);
}

void TrainingCorpusReader::note_error(std::size_t line, const std::string& message) {
  ++malformed_;
  if (errors_.size() < kMaxReportedErrors) {
    errors_.push_back({line, message});
  }
}

void TrainingCorpusReader::check_ratio(bool at_eof) {
  // Small files only get judged at EOF; early abort needs enough lines for
  // the 1% ratio to be meaningful.
  if (malformed_ == 0) return;
  bool over = static_cast<double>(malformed_) > 0.01 * static_cast<double>(lines_seen_);
  if (over && (at_eof || lines_seen_ >= 200)) {
    std::string msg = path_ + ": " + std::to_string(malformed_) + " malformed of " +
                      std::to_string(lines_seen_) + " lines (>1%); first errors:";
    for (const auto& e : errors_) {
      msg += "\n  line " + std::to_string(e.line_number) + ": " + e.message;
      if (&e - errors_.data() >= 9) break;
    }
    throw SchemaError(msg);
  }
}

std::optional<DialogueSample> TrainingCorpusReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++lines_seen_;
    if (line.empty()) continue;
    try {
      return training_record_from_json(line);
    } catch (const SchemaError& e) {
      note_error(lines_seen_, e.what());
      check_ratio(/*at_eof=*/false);
    }
  }
  check_ratio(/*at_eof=*/true);
  return std::nullopt;
}

std::vector<DialogueSample> load_training_corpus(const std::string& path) {
  TrainingCorpusReader reader(path);
  std::vector<DialogueSample> samples;
  while (auto sample = reader.next()) samples.push_back(std::move(*sample));
  return samples;
}

std::vector<EditCase> load_edit_cases(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edit cases: " + path);
  std::vector<EditCase> cases;
  std::vector<LineError> errors;
  std::size_t lines = 0, malformed = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lines;
    if (line.empty()) continue;
    try {
      cases.push_back(edit_case_from_json(line));
    } catch (const SchemaError& e) {
      ++malformed;
      if (errors.size() < TrainingCorpusReader::kMaxReportedErrors) {
        errors.push_back({lines, e.what()});
      }
    }
  }
  if (malformed > 0 && static_cast<double>(malformed) > 0.01 * static_cast<double>(lines)) {
    std::string msg = path + ": " + std::to_string(malformed) + " malformed of " +
                      std::to_string(lines) + " lines (>1%); first errors:";
    for (std::size_t i = 0; i < errors.size() && i < 10; ++i) {
      msg += "\n  line " + std::to_string(errors[i].line_number) + ": " + errors[i].message;
    }
    throw SchemaError(msg);
  }
  return cases;
}

void write_training_corpus(const std::string& path,
                           const std::vector<DialogueSample>& samples) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write training corpus: " + path);
  for (const auto& s : samples) out << training_record_to_json(s) << "\n";
}

void write_edit_cases(const std::string& path, const std::vector<EditCase>& cases) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write edit cases: " + path);
  for (const auto& c : cases) out << edit_case_to_json(c) << "\n";
}

}  // namespace gme::corpus
