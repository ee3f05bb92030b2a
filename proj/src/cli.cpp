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

#include "dialsid/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <vector>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "dialsid/corpus.hpp"
#include "dialsid/eval.hpp"
#include "dialsid/noise.hpp"
#include "dialsid/normalize.hpp"
#include "dialsid/pipeline.hpp"
#include "dialsid/report.hpp"
#include "dialsid/stats.hpp"
#include "dialsid/subword.hpp"
#include "dialsid/surgery.hpp"
#include "dialsid/utf8.hpp"

namespace dialsid {

std::string_view toolkit_version() { return DIALSID_VERSION; }

namespace {

namespace fs = std::filesystem;

// Shared by every subcommand that reads or writes CoNLL blocks.
struct FormatFlags {
  std::string layout = "default";
  bool allow_missing_intent = false;
  std::string variety;

  void add(CLI::App* app) {
    app->add_option("--format", layout, "Column layout: default (token, tag) or xsid")
        ->check(CLI::IsMember({"default", "xsid"}));
    app->add_flag("--allow-missing-intent", allow_missing_intent,
                  "Accept blocks without an intent comment");
    app->add_option("--variety", variety, "Variety for blocks without a variety comment");
  }

  FormatOptions options() const {
    FormatOptions o = layout == "xsid" ? FormatOptions::xsid() : FormatOptions{};
    if (allow_missing_intent) o.require_intent = false;
    if (!variety.empty()) o.default_variety = variety;
    return o;
  }
};

struct ReportFlags {
  std::string format = "json";
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--report", format, "Report format")->check(CLI::IsMember({"json", "tsv"}));
    app->add_option("--out", out, "Report path (default: stdout)");
  }
  bool json() const { return format == "json"; }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("write failed on '" + path + "'");
}

void emit(const std::string& path, std::string_view text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_file(path, text);
  }
}

std::string render(const ReportFlags& r, const nlohmann::json& j, const std::string& tsv) {
  return r.json() ? j.dump(2) + "\n" : tsv;
}

nlohmann::json load_json_config(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config '" + path + "': " + e.what());
  }
}

// Config validation failures are usage errors.
template <typename F>
auto as_usage(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(what + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(what + ": " + e.what());
  }
}

void refuse_overwrite(const std::string& out, std::initializer_list<const std::string*> inputs) {
  if (out.empty()) return;
  std::error_code ec;
  for (const auto* in : inputs) {
    if (in->empty()) continue;
    if (fs::equivalent(out, *in, ec) ||
        fs::weakly_canonical(out, ec) == fs::weakly_canonical(*in, ec)) {
      throw UsageError("--out must differ from input '" + *in + "'");
    }
  }
}

Dataset read_all(const std::vector<std::string>& paths, const FormatOptions& options) {
  if (paths.size() == 1) return read_dataset(paths.front(), options);
  Dataset merged;
  for (const auto& p : paths) {
    Dataset d = read_dataset(p, options);
    if (merged.name.empty()) merged.name = d.name;
    for (auto& u : d.utterances) merged.utterances.push_back(std::move(u));
  }
  return merged;
}

std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw UsageError("--layers: bad index '" + std::string(item) + "'");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct ParseCheckCmd {
  std::vector<std::string> in;
  FormatFlags format;
  ReportFlags report;

  int operator()(std::ostream& out, std::ostream& err) const {
    const Dataset d = read_all(in, format.options());
    std::vector<BioViolation> violations;
    for (const auto& u : d.utterances) {
      auto v = validate_bio(u);
      violations.insert(violations.end(), v.begin(), v.end());
    }
    err << fmt::format("{} utterances, {} BIO violations\n", d.utterances.size(), violations.size());
    emit(report.out, render(report, to_json(violations), to_tsv(violations)), out);
    return violations.empty() ? kExitOk : kExitDataError;
  }
};

struct StatsCmd {
  std::vector<std::string> in;
  std::vector<std::string> unseen_from;
  FormatFlags format;
  ReportFlags report;

  int operator()(std::ostream& out, std::ostream&) const {
    const Dataset d = read_all(in, format.options());
    const LabelInventory inv = label_inventory(d);
    nlohmann::json j{{"inventory", to_json(inv)}};
    std::string tsv = to_tsv(inv);
    if (!unseen_from.empty()) {
      const Dataset train = read_all(unseen_from, format.options());
      const UnseenReport unseen = unseen_label_report(train, d);
      j["unseen"] = to_json(unseen);
      std::istringstream rows(to_tsv(unseen));
      std::string line;
      std::getline(rows, line);  // header
      while (std::getline(rows, line)) tsv += "unseen_" + line + "\n";
    }
    emit(report.out, render(report, j, tsv), out);
    return kExitOk;
  }
};

struct SplitCmd {
  std::string in;
  std::string first_out;
  std::string second_out;
  double ratio = 0.9;
  std::uint64_t seed = 0;
  std::string strategy = "uniform";
  std::string delimiter = "-";
  FormatFlags format;

  int operator()(std::ostream&, std::ostream& err) const {
    err << "seed: " << seed << "\n";
    refuse_overwrite(first_out, {&in});
    refuse_overwrite(second_out, {&in});
    const auto options = format.options();
    const Dataset d = read_dataset(in, options);
    SplitOptions so;
    so.ratio = ratio;
    so.seed = seed;
    so.strategy = strategy == "grouped" ? SplitStrategy::kGrouped : SplitStrategy::kUniform;
    so.group_delimiter = delimiter;
    auto [a, b] = as_usage("split", [&] { return split_dataset(d, so); });
    write_dataset_file(a, first_out, options);
    write_dataset_file(b, second_out, options);
    return kExitOk;
  }
};

struct NoiseCmd {
  std::string in;
  std::string out;
  std::string config;
  std::optional<double> fraction;
  std::optional<std::uint64_t> seed;
  std::string alphabet;
  std::string alphabet_from;
  std::vector<double> weights;
  std::string edits;
  FormatFlags format;

  int operator()(std::ostream& stdout_, std::ostream& err) const {
    const auto options = format.options();
    NoiseConfig cfg;
    if (!config.empty()) {
      const auto j = load_json_config(config);
      cfg = as_usage("noise config '" + config + "'", [&] { return noise_config_from_json(j); });
    }
    if (fraction) cfg.word_fraction = *fraction;
    if (seed) cfg.seed = *seed;
    if (!weights.empty()) {
      if (weights.size() != 3) throw UsageError("--weights takes delete,insert,both");
      std::copy(weights.begin(), weights.end(), cfg.op_weights.begin());
    }
    if (!alphabet.empty()) {
      cfg.alphabet = as_usage("--alphabet", [&] { return Alphabet(utf8::decode(alphabet)); });
    } else if (!alphabet_from.empty()) {
      cfg.alphabet = build_alphabet(read_dataset(alphabet_from, options));
    }
    if (cfg.alphabet.empty()) throw UsageError("no alphabet: pass --alphabet-from, --alphabet or a config");
    as_usage("noise", [&] { cfg.validate(); return 0; });
    refuse_overwrite(out, {&in});

    err << "seed: " << cfg.seed << "\n";
    const Dataset d = read_dataset(in, options);
    std::vector<NoiseEdit> log;
    const Dataset noisy = noise_dataset(d, cfg, edits.empty() ? nullptr : &log);
    emit(out, write_dataset(noisy, options), stdout_);
    if (!edits.empty()) {
      std::string lines;
      for (const auto& e : log) {
        nlohmann::json j{{"utterance", d.utterances[e.utterance].id},
                         {"token", e.token},
                         {"op", std::string(to_string(e.op))},
                         {"position", e.position},
                         {"before", e.before},
                         {"after", e.after}};
        if (e.op != NoiseOp::kDelete) j["inserted"] = utf8::encode(e.inserted);
        lines += j.dump() + "\n";
      }
      write_file(edits, lines);
    }
    return kExitOk;
  }
};

struct NormalizeCmd {
  std::string in;
  std::string out;
  std::string trace;
  bool dataset = false;
  FormatFlags format;

  int operator()(std::ostream& stdout_, std::ostream&) const {
    refuse_overwrite(out, {&in});
    std::vector<RuleTrace> traces;
    auto* sink = trace.empty() ? nullptr : &traces;
    if (dataset) {
      const auto options = format.options();
      emit(out, write_dataset(normalize_dataset(read_dataset(in, options), sink), options), stdout_);
    } else {
      emit(out, normalize_text(read_file(in), sink), stdout_);
    }
    if (sink) {
      std::string lines;
      for (const auto& t : traces) {
        if (!t.applied.empty()) lines += to_json(t).dump() + "\n";
      }
      write_file(trace, lines);
    }
    return kExitOk;
  }
};

struct EvaluateCmd {
  std::string gold;
  std::string pred;
  std::string group_by = "none";
  std::string mode = "all";
  std::string repair = "lenient";
  FormatFlags format;
  ReportFlags report;

  int operator()(std::ostream& out, std::ostream&) const {
    const auto options = format.options();
    const Dataset g = read_dataset(gold, options);
    const Dataset p = read_dataset(pred, options);
    EvalOptions eo;
    eo.group_by = group_by == "variety" ? GroupBy::kVariety : GroupBy::kNone;
    eo.repair = repair == "strict" ? RepairPolicy::kStrict : RepairPolicy::kLenient;
    EvalReport r = evaluate(g, p, eo);
    if (mode != "all") r.modes = {parse_match_mode(mode)};
    emit(report.out, render(report, to_json(r), to_tsv(r)), out);
    return kExitOk;
  }
};

struct SubwordCmd {
  std::string vocab;
  std::string in;
  std::string against;
  std::string marker = "##";
  std::string unk = "[UNK]";
  bool letters_only = false;
  bool text = false;
  FormatFlags format;
  ReportFlags report;

  SplitCounts count(const SubwordVocab& v, const std::string& path) const {
    const WordFilter filter{letters_only};
    if (text) return split_counts_text(v, read_file(path), filter);
    return split_counts(v, read_dataset(path, format.options()), filter);
  }

  int operator()(std::ostream& out, std::ostream&) const {
    const SubwordVocab v = SubwordVocab::load_file(vocab, marker, unk);
    std::vector<std::pair<std::string, SplitCounts>> rows{{"in", count(v, in)}};
    if (!against.empty()) rows.emplace_back("against", count(v, against));

    nlohmann::json j = nlohmann::json::object();
    std::string tsv = "input\tsplit\ttotal\tratio\n";
    for (const auto& [name, c] : rows) {
      j[name] = {{"path", name == "in" ? in : against}, {"split", c.split}, {"total", c.total},
                 {"ratio", c.ratio()}};
      tsv += fmt::format("{}\t{}\t{}\t{}\n", name, c.split, c.total, c.ratio());
    }
    if (rows.size() == 2) {
      const double diff = std::abs(rows[0].second.ratio() - rows[1].second.ratio());
      j["difference"] = diff;
      tsv += fmt::format("difference\t\t\t{}\n", diff);
    }
    emit(report.out, render(report, j, tsv), out);
    return kExitOk;
  }
};

// One numeric column of a TSV file with a header row, given as FILE:COLUMN.
// COLUMN is a header name or a 0-based index.
std::vector<double> read_column(const std::string& spec) {
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == spec.size()) {
    throw UsageError("column spec '" + spec + "' must be FILE:COLUMN");
  }
  const std::string path = spec.substr(0, colon);
  const std::string column = spec.substr(colon + 1);
  std::istringstream in(read_file(path));

  auto split_row = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(line);
    while (std::getline(row, cell, '\t')) cells.push_back(cell);
    return cells;
  };

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_row(line);
  std::size_t index = header.size();
  if (auto it = std::find(header.begin(), header.end(), column); it != header.end()) {
    index = static_cast<std::size_t>(it - header.begin());
  } else {
    std::from_chars(column.data(), column.data() + column.size(), index);
  }
  if (index >= header.size()) throw UsageError("no column '" + column + "' in '" + path + "'");

  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_row(line);
    if (index >= cells.size()) {
      throw std::runtime_error(fmt::format("{}:{}: missing column {}", path, line_no, column));
    }
    const std::string& cell = cells[index];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw std::runtime_error(fmt::format("{}:{}: '{}' is not a number", path, line_no, cell));
    }
    values.push_back(v);
  }
  return values;
}

struct CorrelateCmd {
  std::string x;
  std::string y;
  bool exact = false;
  ReportFlags report;

  int operator()(std::ostream& out, std::ostream&) const {
    const auto xs = read_column(x);
    const auto ys = read_column(y);
    const auto method = exact ? SpearmanPValue::kExactPermutation : SpearmanPValue::kStudentT;
    const CorrelationResult c = correlate(xs, ys, method);
    emit(report.out, render(report, to_json(c), to_tsv(c)), out);
    return kExitOk;
  }
};

struct SurgeryFlags {
  std::string scheme;
  std::string a;
  std::string b;
  std::string out;

  void add(CLI::App* app, std::string_view a_help, std::string_view b_help, bool needs_out) {
    app->add_option("--scheme", scheme, "Naming scheme JSON (default: 12-layer encoder naming)");
    app->add_option("--a", a, std::string(a_help))->required();
    app->add_option("--b", b, std::string(b_help))->required();
    auto* o = app->add_option("--out", out, "Output checkpoint");
    if (needs_out) o->required();
  }

  NamingScheme load_scheme() const {
    if (scheme.empty()) return {};
    const auto j = load_json_config(scheme);
    return as_usage("scheme '" + scheme + "'", [&] { return naming_scheme_from_json(j); });
  }
};

struct RevertCmd {
  SurgeryFlags io;
  std::string layers;
  bool embeddings = false;
  bool heads = false;
  bool all = false;

  int operator()(std::ostream&, std::ostream&) const {
    const NamingScheme scheme = io.load_scheme();
    refuse_overwrite(io.out, {&io.a, &io.b});
    std::vector<LayerGroup> groups;
    if (all) {
      groups.push_back(LayerGroup::embeddings());
      for (std::size_t i = 0; i < scheme.num_layers; ++i) groups.push_back(LayerGroup::encoder_layer(i));
      groups.push_back(LayerGroup::heads());
    } else {
      if (embeddings) groups.push_back(LayerGroup::embeddings());
      for (auto i : parse_index_list(layers)) groups.push_back(LayerGroup::encoder_layer(i));
      if (heads) groups.push_back(LayerGroup::heads());
    }
    const auto finetuned = CheckpointFile::open(io.a);
    const auto pretrained = CheckpointFile::open(io.b);
    write_checkpoint(revert_layers(finetuned, pretrained, groups, scheme), io.out);
    return kExitOk;
  }
};

struct SwapCmd {
  SurgeryFlags io;
  std::string layers = "0,1";
  bool embeddings = true;

  int operator()(std::ostream&, std::ostream&) const {
    const NamingScheme scheme = io.load_scheme();
    refuse_overwrite(io.out, {&io.a, &io.b});
    const auto indices = parse_index_list(layers);
    const auto recipient = CheckpointFile::open(io.a);
    const auto donor = CheckpointFile::open(io.b);
    write_checkpoint(swap_layers(recipient, donor, indices, embeddings, scheme), io.out);
    return kExitOk;
  }
};

struct MavCmd {
  SurgeryFlags io;
  std::string format = "json";

  int operator()(std::ostream& out, std::ostream&) const {
    const NamingScheme scheme = io.load_scheme();
    const MavReport m = mav_report(CheckpointFile::open(io.a), CheckpointFile::open(io.b), scheme);
    emit(io.out, format == "json" ? to_json(m).dump(2) + "\n" : to_tsv(m), out);
    return kExitOk;
  }
};

struct PipelineCmd {
  std::string config;
  std::string manifest;

  int operator()(std::ostream& out, std::ostream& err) const {
    PipelineConfig cfg = load_pipeline_config(config);
    if (!manifest.empty()) cfg.manifest_path = manifest;
    return run_pipeline(cfg, out, err).exit_code;
  }
};

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Slot and intent detection data toolkit", "dialsid"};
  app.require_subcommand(1);
  app.set_version_flag("--version",
                       fmt::format("dialsid {}\nmanifest format {}\ncheckpoint format safetensors",
                                   toolkit_version(), kManifestFormat));

  ParseCheckCmd parse_check;
  auto* pc = app.add_subcommand("parse-check", "Parse files and report BIO violations (exit 1 if any)");
  pc->add_option("--in", parse_check.in, "Input file(s)")->required();
  parse_check.format.add(pc);
  parse_check.report.add(pc);

  StatsCmd stats;
  auto* st = app.add_subcommand("stats", "Label inventory, optionally with labels unseen in training");
  st->add_option("--in", stats.in, "Input file(s)")->required();
  st->add_option("--unseen-from", stats.unseen_from, "Training file(s) to compare against");
  stats.format.add(st);
  stats.report.add(st);

  SplitCmd split;
  auto* sp = app.add_subcommand("split", "Seeded train/dev split");
  sp->add_option("--in", split.in)->required();
  sp->add_option("--first-out", split.first_out, "First part (ratio share)")->required();
  sp->add_option("--second-out", split.second_out, "Remainder")->required();
  sp->add_option("--ratio", split.ratio)->check(CLI::Range(0.0, 1.0));
  sp->add_option("--seed", split.seed);
  sp->add_option("--strategy", split.strategy)->check(CLI::IsMember({"uniform", "grouped"}));
  sp->add_option("--group-delimiter", split.delimiter);
  split.format.add(sp);

  NoiseCmd noise;
  auto* no = app.add_subcommand("noise", "Character-level noise on a share of the words of each utterance");
  no->add_option("--in", noise.in)->required();
  no->add_option("--out", noise.out, "Output file (default: stdout)");
  no->add_option("--config", noise.config, "Noise config JSON");
  no->add_option("--fraction", noise.fraction, "Share of alphabetic words to noise");
  no->add_option("--seed", noise.seed);
  no->add_option("--alphabet", noise.alphabet, "Letters to insert");
  no->add_option("--alphabet-from", noise.alphabet_from, "Dataset whose letters form the alphabet");
  no->add_option("--weights", noise.weights, "Relative weights of delete,insert,both")->delimiter(',');
  no->add_option("--edits", noise.edits, "Write one JSON line per edit");
  noise.format.add(no);

  NormalizeCmd normalize;
  auto* nm = app.add_subcommand("normalize", "Spelling normalization of dialect transcriptions");
  nm->add_option("--in", normalize.in)->required();
  nm->add_option("--out", normalize.out, "Output file (default: stdout)");
  nm->add_option("--trace", normalize.trace, "Write one JSON line per changed token");
  nm->add_flag("--dataset", normalize.dataset, "Input is a CoNLL dataset; only tokens are changed");
  normalize.format.add(nm);

  EvaluateCmd evaluate_cmd;
  auto* ev = app.add_subcommand("evaluate", "Intent accuracy and span F1");
  ev->add_option("--gold", evaluate_cmd.gold)->required();
  ev->add_option("--pred", evaluate_cmd.pred)->required();
  ev->add_option("--group-by", evaluate_cmd.group_by)->check(CLI::IsMember({"none", "variety"}));
  ev->add_option("--mode", evaluate_cmd.mode)
      ->check(CLI::IsMember({"all", "strict", "loose", "unlabelled", "unlabelled-overlap"}));
  ev->add_option("--repair", evaluate_cmd.repair, "Handling of ill-formed BIO")
      ->check(CLI::IsMember({"lenient", "strict"}));
  evaluate_cmd.format.add(ev);
  evaluate_cmd.report.add(ev);

  SubwordCmd subword;
  auto* sw = app.add_subcommand("subword-ratio", "Share of words split by a subword vocabulary");
  sw->add_option("--vocab", subword.vocab, "One subword per line")->required();
  sw->add_option("--in", subword.in)->required();
  sw->add_option("--against", subword.against, "Second input; reports the ratio difference");
  sw->add_option("--marker", subword.marker, "Continuation marker");
  sw->add_option("--unk", subword.unk, "Unknown token");
  sw->add_flag("--letters-only", subword.letters_only, "Count only purely alphabetic words");
  sw->add_flag("--text", subword.text, "Inputs are plain text");
  subword.format.add(sw);
  subword.report.add(sw);

  CorrelateCmd corr;
  auto* co = app.add_subcommand("correlate", "Pearson and Spearman correlation with p-values");
  co->add_option("--x", corr.x, "FILE:COLUMN of a TSV with a header row")->required();
  co->add_option("--y", corr.y, "FILE:COLUMN of a TSV with a header row")->required();
  co->add_flag("--exact", corr.exact, "Exact permutation p for Spearman (n <= 10)");
  corr.report.add(co);

  auto* su = app.add_subcommand("surgery", "Layer reverting, layer swapping and MAV");
  su->require_subcommand(1);
  RevertCmd revert;
  auto* rv = su->add_subcommand("revert", "Replace groups of a fine-tuned model with pretrained values");
  revert.io.add(rv, "Fine-tuned checkpoint", "Pretrained checkpoint", true);
  rv->add_option("--layers", revert.layers, "Comma-separated layer indices");
  rv->add_flag("--embeddings", revert.embeddings, "Include the embeddings");
  rv->add_flag("--heads", revert.heads, "Include the task heads");
  rv->add_flag("--all", revert.all, "Every group");
  SwapCmd swap;
  auto* sw2 = su->add_subcommand("swap", "Splice donor layers into a recipient");
  swap.io.add(sw2, "Recipient checkpoint", "Donor checkpoint", true);
  sw2->add_option("--layers", swap.layers, "Comma-separated layer indices");
  sw2->add_flag("--embeddings,!--no-embeddings", swap.embeddings, "Include the embeddings (default on)");
  MavCmd mav;
  auto* mv = su->add_subcommand("mav", "Per-group mean absolute parameter difference");
  mav.io.add(mv, "First checkpoint", "Second checkpoint", false);
  mv->add_option("--report", mav.format)->check(CLI::IsMember({"json", "tsv"}));

  PipelineCmd pipeline;
  auto* pl = app.add_subcommand("pipeline", "Run a multi-step config and write a manifest");
  pl->add_option("--config", pipeline.config)->required();
  pl->add_option("--manifest", pipeline.manifest, "Manifest path (overrides the config)");

  if (!args.empty() && !args.front().starts_with("-") && !app.get_subcommand_no_throw(args.front())) {
    err << "unknown subcommand '" << args.front() << "'\n" << app.help();
    return kExitUsage;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    if (dynamic_cast<const CLI::RequiredError*>(&e) || dynamic_cast<const CLI::ExtrasError*>(&e)) {
      err << app.help();
    }
    return kExitUsage;
  }

  auto dispatch = [&]() -> int {
    if (pc->parsed()) return parse_check(out, err);
    if (st->parsed()) return stats(out, err);
    if (sp->parsed()) return split(out, err);
    if (no->parsed()) return noise(out, err);
    if (nm->parsed()) return normalize(out, err);
    if (ev->parsed()) return evaluate_cmd(out, err);
    if (sw->parsed()) return subword(out, err);
    if (co->parsed()) return corr(out, err);
    if (rv->parsed()) return revert(out, err);
    if (sw2->parsed()) return swap(out, err);
    if (mv->parsed()) return mav(out, err);
    if (pl->parsed()) return pipeline(out, err);
    return kExitUsage;
  };

  try {
    return dispatch();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
}

int run_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace dialsid
