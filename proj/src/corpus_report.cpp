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

#include "dialsid/report.hpp"

#include <stdexcept>

#include <fmt/core.h>

namespace dialsid {
namespace {

// Round-trippable shortest form.
std::string num(double v) { return fmt::format("{}", v); }

nlohmann::json counts_json(const LabelCounts& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : c) j[k] = v;
  return j;
}

void counts_tsv(std::string& out, std::string_view section, const LabelCounts& c) {
  out += fmt::format("{}\t#distinct\t{}\n", section, c.size());
  for (const auto& [k, v] : c) out += fmt::format("{}\t{}\t{}\n", section, k, v);
}

nlohmann::json bundle_json(const ScoreBundle& b, const std::vector<MatchMode>& modes) {
  nlohmann::json j{{"utterances", b.utterances},
                   {"intent_accuracy", b.utterances ? b.intent_accuracy() : 0.0}};
  nlohmann::json slots = nlohmann::json::object();
  for (auto m : modes) slots[std::string(to_string(m))] = to_json(b.get(m));
  j["slots"] = std::move(slots);
  return j;
}

void bundle_tsv(std::string& out, std::string_view group, const ScoreBundle& b,
                const std::vector<MatchMode>& modes) {
  // Single-label accuracy: precision, recall and F1 coincide.
  const std::string acc = num(b.utterances ? b.intent_accuracy() : 0.0);
  out += fmt::format("{}\tintent\t{}\t{}\t{}\t{}\t{}\t{}\n", group, b.intents_correct, b.utterances,
                     b.utterances, acc, acc, acc);
  for (auto m : modes) {
    const PRF& p = b.get(m);
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", group, to_string(m), p.matched, p.predicted,
                       p.gold, num(p.precision()), num(p.recall()), num(p.f1()));
  }
}

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "tsv") return ReportFormat::kTsv;
  throw std::invalid_argument("unknown report format '" + name + "' (expected json or tsv)");
}

nlohmann::json to_json(const LabelInventory& inv) {
  return {{"utterances", inv.utterances},
          {"tokens", inv.tokens},
          {"distinct_intents", inv.intents.size()},
          {"distinct_slot_labels", inv.slot_labels.size()},
          {"distinct_full_tags", inv.full_tags.size()},
          {"intents", counts_json(inv.intents)},
          {"slot_labels", counts_json(inv.slot_labels)},
          {"full_tags", counts_json(inv.full_tags)},
          {"varieties", counts_json(inv.varieties)}};
}

nlohmann::json to_json(const UnseenReport& r) {
  return {{"intents", counts_json(r.intents)},
          {"slot_labels", counts_json(r.slot_labels)},
          {"full_tags", counts_json(r.full_tags)}};
}

nlohmann::json to_json(const std::vector<BioViolation>& violations) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& v : violations) {
    j.push_back({{"utterance_id", v.utterance_id},
                 {"position", v.position},
                 {"kind", std::string(to_string(v.kind))},
                 {"detail", v.detail}});
  }
  return j;
}

nlohmann::json to_json(const PRF& prf) {
  return {{"matched", prf.matched},      {"predicted", prf.predicted}, {"gold", prf.gold},
          {"precision", prf.precision()}, {"recall", prf.recall()},     {"f1", prf.f1()}};
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& [k, b] : r.per_group) groups[k] = bundle_json(b, r.modes);
  return {{"overall", bundle_json(r.overall, r.modes)}, {"per_group", std::move(groups)}};
}

nlohmann::json to_json(const CorrelationResult& c) {
  return {{"n", c.n},
          {"pearson", {{"r", c.r}, {"p", c.p_r}}},
          {"spearman", {{"rho", c.rho}, {"p", c.p_rho}}}};
}

nlohmann::json to_json(const MavReport& m) {
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& [k, g] : m.per_group) groups[k] = {{"mav", g.mav}, {"parameters", g.parameters}};
  return {{"parameters", m.parameters},
          {"global_mav", m.global_mav},
          {"global_mean", m.global_mean},
          {"global_variance", m.global_variance},
          {"per_group", std::move(groups)}};
}

std::string to_tsv(const LabelInventory& inv) {
  std::string out = "section\tkey\tvalue\n";
  out += fmt::format("total\tutterances\t{}\n", inv.utterances);
  out += fmt::format("total\ttokens\t{}\n", inv.tokens);
  counts_tsv(out, "intent", inv.intents);
  counts_tsv(out, "slot_label", inv.slot_labels);
  counts_tsv(out, "full_tag", inv.full_tags);
  counts_tsv(out, "variety", inv.varieties);
  return out;
}

std::string to_tsv(const UnseenReport& r) {
  std::string out = "section\tkey\tvalue\n";
  counts_tsv(out, "intent", r.intents);
  counts_tsv(out, "slot_label", r.slot_labels);
  counts_tsv(out, "full_tag", r.full_tags);
  return out;
}

std::string to_tsv(const std::vector<BioViolation>& violations) {
  std::string out = "utterance_id\tposition\tkind\tdetail\n";
  for (const auto& v : violations) {
    out += fmt::format("{}\t{}\t{}\t{}\n", v.utterance_id, v.position, to_string(v.kind), v.detail);
  }
  return out;
}

std::string to_tsv(const EvalReport& r) {
  std::string out = "group\tmetric\tmatched\tpredicted\tgold\tprecision\trecall\tf1\n";
  bundle_tsv(out, "overall", r.overall, r.modes);
  for (const auto& [k, b] : r.per_group) bundle_tsv(out, k, b, r.modes);
  return out;
}

std::string to_tsv(const CorrelationResult& c) {
  std::string out = "statistic\tvalue\tp\tn\n";
  out += fmt::format("pearson\t{}\t{}\t{}\n", num(c.r), num(c.p_r), c.n);
  out += fmt::format("spearman\t{}\t{}\t{}\n", num(c.rho), num(c.p_rho), c.n);
  return out;
}

std::string to_tsv(const MavReport& m) {
  std::string out = "group\tparameters\tmav\n";
  for (const auto& [k, g] : m.per_group) out += fmt::format("{}\t{}\t{}\n", k, g.parameters, num(g.mav));
  out += fmt::format("all\t{}\t{}\n", m.parameters, num(m.global_mav));
  out += fmt::format("variance\t{}\t{}\n", m.parameters, num(m.global_variance));
  return out;
}

}  // namespace dialsid
