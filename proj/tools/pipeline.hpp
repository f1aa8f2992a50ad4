/*
 * Copyright 2026 The FlexLP Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "run_config.hpp"

namespace flex::cli {

/// Hex FNV-1a over a file's bytes. A missing file raises DependencyError.
std::string file_hash(const std::string& path);

/// Every stage writes <stage>/manifest.json into the work directory. Paths
/// inside are relative to the work directory.
struct Manifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;   // path, hash
  std::vector<std::pair<std::string, std::string>> outputs;  // path, hash
  nlohmann::json metrics = nlohmann::json::object();
  double seconds = 0;

  nlohmann::json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
};

/// Runs one pipeline stage inside `workdir`. Writes results to `out` and
/// warnings to `err`; errors propagate as flex::Error.
class Pipeline {
 public:
  Pipeline(std::string workdir, RunConfig cfg, std::ostream& out, std::ostream& err);

  void synth();
  void split();
  void pretrain_gnn();
  void pretrain_ggm();
  void flex_tune();
  void eval(const std::string& stage);
  void analyze(const std::string& stage);
  void sweep();

  std::string path(const std::string& rel) const;

 private:
  struct Loaded;
  Graph load_graph_stage(Manifest& m);
  DatasetSplit load_split_stage(const Graph& g, Manifest& m);
  /// Loads an upstream manifest and warns when a file it produced changed.
  Manifest upstream(const std::string& stage, const std::string& needed_by);
  void record_input(Manifest& m, const std::string& rel);
  void finish(Manifest& m, const std::string& stage, const std::vector<std::string>& outputs,
              double seconds);

  std::string dir_;
  RunConfig cfg_;
  std::ostream& out_;
  std::ostream& err_;
};

/// Entry point shared by the executable and the tests. Returns the exit code:
/// 0 success, 2 config or input error, 3 missing dependency, 4 numeric
/// failure, 5 validation failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flex::cli
