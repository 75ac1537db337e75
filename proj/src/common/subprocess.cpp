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

#include "gme/common/subprocess.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "gme/common/error.hpp"

namespace gme {
namespace {

std::filesystem::path temp_file(const char* tag) {
  static std::atomic<unsigned> counter{0};
  auto dir = std::filesystem::temp_directory_path();
  unsigned n = counter.fetch_add(1);
  return dir / ("gme-" + std::string(tag) + "-" + std::to_string(::getpid()) + "-" +
                std::to_string(n) + ".txt");
}

struct TempGuard {
  std::filesystem::path path;
  ~TempGuard() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
};

}  // namespace

std::vector<std::string> run_line_protocol(const std::string& command,
                                           const std::vector<std::string>& request_lines) {
  TempGuard req{temp_file("req")};
  TempGuard resp{temp_file("resp")};
  {
    std::ofstream out(req.path);
    if (!out) throw BackendError("cannot write request file: " + req.path.string());
    for (const auto& line : request_lines) out << line << "\n";
  }
  std::string full = command + " < " + req.path.string() + " > " + resp.path.string();
  int rc = std::system(full.c_str());
  if (rc != 0) {
    throw BackendError("backend command failed (exit " + std::to_string(rc) + "): " + command);
  }
  std::ifstream in(resp.path);
  if (!in) throw BackendError("backend produced no response file: " + command);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  if (lines.size() != request_lines.size()) {
    throw BackendError("backend answered " + std::to_string(lines.size()) + " lines for " +
                       std::to_string(request_lines.size()) + " requests: " + command);
  }
  return lines;
}

}  // namespace gme
