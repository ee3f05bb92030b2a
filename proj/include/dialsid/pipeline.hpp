// Copyright 2026 The dialsid Authors.
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

// Ordered multi-step runs with a provenance manifest.
//
// Config:
//
//   {"manifest": "run.manifest.json",          // optional
//    "steps": [
//      {"name": "norm",                         // optional
//       "command": "normalize",
//       "inputs":  {"in": "dev.conll"},
//       "outputs": {"out": "dev.norm.conll"},
//       "options": {"dataset": true}}]}
//
// Each step runs the subcommand with --<key> <value> for every input, output
// and option (true becomes a bare flag, false is dropped, arrays repeat the
// flag). Relative paths resolve against the config file's directory. The
// manifest records, per step, the argument vector, the SHA-256 of every input
// and output, the seed of stochastic steps and the exit status. It carries no
// timestamps or absolute paths, so identical runs give identical manifests.

#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

namespace dialsid {

struct PipelineStep {
  std::string name;
  std::string command;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
  nlohmann::ordered_json options = nlohmann::ordered_json::object();
};

struct PipelineConfig {
  std::filesystem::path base_dir;
  std::filesystem::path manifest_path;
  std::vector<PipelineStep> steps;
};

// Throws UsageError on unknown keys or malformed values.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct PipelineResult {
  int exit_code = 0;
  nlohmann::ordered_json manifest;
};

// Runs every step, stopping at the first failure, then writes the manifest.
PipelineResult run_pipeline(const PipelineConfig& config, std::ostream& out, std::ostream& err);

}  // namespace dialsid
