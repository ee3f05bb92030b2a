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

#include "dialsid/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include "dialsid/cli.hpp"
#include "dialsid/digest.hpp"

namespace dialsid {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

void check_keys(const ojson& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw UsageError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw UsageError(where + ": unknown key '" + key + "'");
    }
  }
}

// Flag values: a path string or a list of path strings.
void check_paths(const ojson& j, const std::string& where) {
  if (!j.is_object()) throw UsageError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const bool ok = value.is_string() ||
                    (value.is_array() && std::all_of(value.begin(), value.end(),
                                                     [](const ojson& v) { return v.is_string(); }));
    if (!ok) throw UsageError(where + "." + key + " must be a path or a list of paths");
  }
}

std::string option_text(const ojson& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

std::string resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal().string();
}

template <typename F>
void for_each_path(const ojson& paths, F&& f) {
  for (const auto& [flag, value] : paths.items()) {
    if (value.is_array()) {
      for (const auto& v : value) f(flag, v.template get<std::string>());
    } else {
      f(flag, value.template get<std::string>());
    }
  }
}

ojson digest_paths(const fs::path& base, const ojson& paths) {
  ojson out = ojson::object();
  for (const auto& [flag, value] : paths.items()) {
    auto describe = [&](const ojson& p) {
      const std::string rel = p.get<std::string>();
      const std::string abs = resolve(base, rel);
      ojson d{{"path", rel}};
      d["sha256"] = fs::is_regular_file(abs) ? ojson(sha256_file(abs)) : ojson(nullptr);
      return d;
    };
    if (value.is_array()) {
      ojson list = ojson::array();
      for (const auto& v : value) list.push_back(describe(v));
      out[flag] = std::move(list);
    } else {
      out[flag] = describe(value);
    }
  }
  return out;
}

std::vector<std::string> step_args(const PipelineStep& step, const fs::path& base) {
  std::vector<std::string> args;
  // "surgery revert" style commands carry their sub-subcommand.
  std::istringstream words(step.command);
  for (std::string w; words >> w;) args.push_back(w);
  auto add_path = [&](const std::string& flag, const std::string& p) {
    args.push_back("--" + flag);
    args.push_back(resolve(base, p));
  };
  for_each_path(step.inputs, add_path);
  for_each_path(step.outputs, add_path);
  for (const auto& [flag, value] : step.options.items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + flag);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        args.push_back("--" + flag);
        args.push_back(option_text(v));
      }
    } else {
      args.push_back("--" + flag);
      args.push_back(option_text(value));
    }
  }
  return args;
}

// The seed a stochastic step announced on stderr.
std::optional<std::uint64_t> announced_seed(const std::string& err) {
  std::istringstream lines(err);
  for (std::string line; std::getline(lines, line);) {
    if (line.starts_with("seed: ")) return std::stoull(line.substr(6));
  }
  return std::nullopt;
}

void write_manifest(const fs::path& path, const ojson& manifest) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    f << manifest.dump(2) << "\n";
    if (!f) throw std::runtime_error("write failed on '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

}  // namespace

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  ojson j;
  try {
    j = ojson::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("pipeline config '" + path.string() + "': " + e.what());
  }
  check_keys(j, {"steps", "manifest"}, "pipeline config");

  PipelineConfig cfg;
  cfg.base_dir = path.parent_path();
  cfg.manifest_path = path.string() + ".manifest.json";
  if (j.contains("manifest")) {
    if (!j["manifest"].is_string()) throw UsageError("manifest must be a path");
    cfg.manifest_path = resolve(cfg.base_dir, j["manifest"].get<std::string>());
  }
  if (!j.contains("steps") || !j["steps"].is_array()) throw UsageError("pipeline config needs a steps list");

  std::size_t index = 0;
  for (const auto& s : j["steps"]) {
    const std::string where = "steps[" + std::to_string(index++) + "]";
    check_keys(s, {"name", "command", "inputs", "outputs", "options"}, where);
    if (!s.contains("command") || !s["command"].is_string()) throw UsageError(where + " needs a command");
    PipelineStep step;
    step.command = s["command"].get<std::string>();
    if (step.command == "pipeline") throw UsageError(where + ": pipelines cannot nest");
    step.name = s.value("name", step.command);
    if (s.contains("inputs")) step.inputs = s["inputs"];
    if (s.contains("outputs")) step.outputs = s["outputs"];
    if (s.contains("options")) step.options = s["options"];
    check_paths(step.inputs, where + ".inputs");
    check_paths(step.outputs, where + ".outputs");
    if (!step.options.is_object()) throw UsageError(where + ".options must be a JSON object");
    cfg.steps.push_back(std::move(step));
  }
  return cfg;
}

PipelineResult run_pipeline(const PipelineConfig& config, std::ostream& out, std::ostream& err) {
  PipelineResult result;
  ojson steps = ojson::array();
  std::string status = "ok";

  for (const auto& step : config.steps) {
    ojson record{{"name", step.name}, {"command", step.command}};
    if (status != "ok") {
      record["status"] = "skipped";
      steps.push_back(std::move(record));
      continue;
    }
    const auto args = step_args(step, config.base_dir);
    // Relative argument vector, so the manifest does not depend on the checkout location.
    ojson shown = ojson::array();
    for (const auto& a : step_args(step, fs::path())) shown.push_back(a);
    record["args"] = std::move(shown);
    record["inputs"] = digest_paths(config.base_dir, step.inputs);

    std::ostringstream step_err;
    const int code = run(args, out, step_err);
    err << step_err.str();
    if (auto seed = announced_seed(step_err.str())) record["seed"] = *seed;
    record["outputs"] = digest_paths(config.base_dir, step.outputs);
    record["exit_code"] = code;
    record["status"] = code == kExitOk ? "ok" : "failed";
    if (code != kExitOk) {
      status = "failed";
      result.exit_code = code;
    }
    steps.push_back(std::move(record));
  }

  result.manifest = ojson{{"format", kManifestFormat},
                          {"toolkit", toolkit_version()},
                          {"status", status},
                          {"steps", std::move(steps)}};
  write_manifest(config.manifest_path, result.manifest);
  return result;
}

}  // namespace dialsid
