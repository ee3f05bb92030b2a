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

#include "dialsid/eval.hpp"

#include <algorithm>
#include <unordered_map>

namespace dialsid {
namespace {

void check_side(std::span<const Span> spans, std::string_view side) {
  std::vector<const Span*> sorted;
  sorted.reserve(spans.size());
  for (const auto& s : spans) {
    if (s.start >= s.end) {
      throw SpanInputError(std::string(side) + " span [" + std::to_string(s.start) + ", " +
                           std::to_string(s.end) + ") is empty");
    }
    sorted.push_back(&s);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const Span* a, const Span* b) { return a->start < b->start; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->start < sorted[i - 1]->end) {
      throw SpanInputError("overlapping " + std::string(side) + " spans at token " +
                           std::to_string(sorted[i]->start));
    }
  }
}

// Kuhn's augmenting-path search from gold vertex g.
bool augment(std::size_t g, const std::vector<std::vector<std::size_t>>& adj,
             std::vector<std::ptrdiff_t>& pred_owner, std::vector<char>& visited) {
  for (std::size_t p : adj[g]) {
    if (visited[p]) continue;
    visited[p] = 1;
    if (pred_owner[p] < 0 ||
        augment(static_cast<std::size_t>(pred_owner[p]), adj, pred_owner, visited)) {
      pred_owner[p] = static_cast<std::ptrdiff_t>(g);
      return true;
    }
  }
  return false;
}

}  // namespace

std::string_view to_string(MatchMode mode) {
  switch (mode) {
    case MatchMode::kStrict: return "strict";
    case MatchMode::kLoose: return "loose";
    case MatchMode::kUnlabelled: return "unlabelled";
    case MatchMode::kUnlabelledOverlap: return "unlabelled-overlap";
  }
  return "unknown";
}

MatchMode parse_match_mode(std::string_view name) {
  if (name == "strict") return MatchMode::kStrict;
  if (name == "loose") return MatchMode::kLoose;
  if (name == "unlabelled" || name == "unlabeled") return MatchMode::kUnlabelled;
  if (name == "unlabelled-overlap" || name == "unlabeled-overlap") {
    return MatchMode::kUnlabelledOverlap;
  }
  throw std::invalid_argument("unknown match mode '" + std::string(name) + "'");
}

double PRF::precision() const {
  return predicted == 0 ? 1.0 : static_cast<double>(matched) / static_cast<double>(predicted);
}

double PRF::recall() const {
  return gold == 0 ? 1.0 : static_cast<double>(matched) / static_cast<double>(gold);
}

double PRF::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

bool spans_match(const Span& gold, const Span& pred, MatchMode mode) {
  const bool same_bounds = gold.start == pred.start && gold.end == pred.end;
  const bool overlap = gold.start < pred.end && pred.start < gold.end;
  switch (mode) {
    case MatchMode::kStrict: return same_bounds && gold.label == pred.label;
    case MatchMode::kLoose: return overlap && gold.label == pred.label;
    case MatchMode::kUnlabelled: return same_bounds;
    case MatchMode::kUnlabelledOverlap: return overlap;
  }
  return false;
}

std::size_t match_count(std::span<const Span> gold, std::span<const Span> pred, MatchMode mode) {
  check_side(gold, "gold");
  check_side(pred, "predicted");
  std::vector<std::vector<std::size_t>> adj(gold.size());
  for (std::size_t g = 0; g < gold.size(); ++g) {
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (spans_match(gold[g], pred[p], mode)) adj[g].push_back(p);
    }
  }
  std::vector<std::ptrdiff_t> pred_owner(pred.size(), -1);
  std::vector<char> visited(pred.size());
  std::size_t matched = 0;
  for (std::size_t g = 0; g < gold.size(); ++g) {
    if (adj[g].empty()) continue;
    std::fill(visited.begin(), visited.end(), 0);
    if (augment(g, adj, pred_owner, visited)) ++matched;
  }
  return matched;
}

PRF span_f1(const SpanSets& gold, const SpanSets& pred, MatchMode mode) {
  if (gold.size() != pred.size()) {
    throw AlignmentError("gold has " + std::to_string(gold.size()) + " utterances, prediction " +
                         std::to_string(pred.size()));
  }
  PRF prf;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    prf.matched += match_count(gold[i], pred[i], mode);
    prf.predicted += pred[i].size();
    prf.gold += gold[i].size();
  }
  return prf;
}

namespace {

// Gold index -> prediction, by id.
std::vector<const Utterance*> align(const Dataset& gold, const Dataset& pred) {
  if (gold.size() != pred.size()) {
    throw AlignmentError("gold has " + std::to_string(gold.size()) + " utterances, prediction " +
                         std::to_string(pred.size()));
  }
  std::unordered_map<std::string_view, const Utterance*> by_id;
  for (const auto& u : pred.utterances) {
    if (!by_id.emplace(u.id, &u).second) {
      throw AlignmentError("duplicate id '" + u.id + "' in prediction");
    }
  }
  std::vector<const Utterance*> out;
  out.reserve(gold.size());
  for (const auto& g : gold.utterances) {
    auto it = by_id.find(g.id);
    if (it == by_id.end()) throw AlignmentError("id '" + g.id + "' missing from prediction");
    if (it->second->size() != g.size()) {
      throw AlignmentError("id '" + g.id + "' has " + std::to_string(g.size()) +
                           " gold tokens but " + std::to_string(it->second->size()) +
                           " predicted");
    }
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

double intent_accuracy(const Dataset& gold, const Dataset& pred) {
  const auto aligned = align(gold, pred);
  if (gold.empty()) return 1.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold.utterances[i].intent == aligned[i]->intent) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

double ScoreBundle::intent_accuracy() const {
  return utterances == 0 ? 1.0
                         : static_cast<double>(intents_correct) / static_cast<double>(utterances);
}

const PRF& ScoreBundle::get(MatchMode mode) const {
  switch (mode) {
    case MatchMode::kStrict: return strict;
    case MatchMode::kLoose: return loose;
    case MatchMode::kUnlabelled: return unlabelled;
    case MatchMode::kUnlabelledOverlap: return unlabelled_overlap;
  }
  return strict;
}

ScoreBundle& ScoreBundle::operator+=(const ScoreBundle& o) {
  utterances += o.utterances;
  intents_correct += o.intents_correct;
  strict += o.strict;
  loose += o.loose;
  unlabelled += o.unlabelled;
  unlabelled_overlap += o.unlabelled_overlap;
  return *this;
}

EvalReport evaluate(const Dataset& gold, const Dataset& pred, const EvalOptions& options) {
  const auto aligned = align(gold, pred);
  EvalReport report;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const Utterance& g = gold.utterances[i];
    const Utterance& p = *aligned[i];
    const auto gold_spans = extract_spans(g.slot_tags, options.repair);
    const auto pred_spans = extract_spans(p.slot_tags, options.repair);

    ScoreBundle one;
    one.utterances = 1;
    one.intents_correct = g.intent == p.intent ? 1 : 0;
    auto score = [&](MatchMode mode) {
      return PRF{match_count(gold_spans, pred_spans, mode), pred_spans.size(), gold_spans.size()};
    };
    one.strict = score(MatchMode::kStrict);
    one.loose = score(MatchMode::kLoose);
    one.unlabelled = score(MatchMode::kUnlabelled);
    one.unlabelled_overlap = score(MatchMode::kUnlabelledOverlap);

    report.overall += one;
    if (options.group_by == GroupBy::kVariety) {
      report.per_group[g.variety.value_or("")] += one;
    }
  }
  return report;
}

}  // namespace dialsid
