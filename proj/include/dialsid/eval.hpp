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

// Intent accuracy and span-level precision/recall/F1 for slot filling.
//
// Three match predicates are supported:
//   strict      same start, end and label
//   loose       same label and at least one shared token
//   unlabelled  same start and end, label ignored
// plus unlabelled-overlap (at least one shared token, label ignored).
//
// Predicted and gold spans are paired one-to-one; the matched count of an
// utterance is the size of a maximum matching under the predicate. Counts
// are micro-averaged over the corpus.

#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dialsid/corpus.hpp"

namespace dialsid {

enum class MatchMode { kStrict, kLoose, kUnlabelled, kUnlabelledOverlap };

std::string_view to_string(MatchMode mode);
MatchMode parse_match_mode(std::string_view name);

struct PRF {
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  double precision() const;
  double recall() const;
  double f1() const;

  PRF& operator+=(const PRF& o) {
    matched += o.matched;
    predicted += o.predicted;
    gold += o.gold;
    return *this;
  }
  friend bool operator==(const PRF&, const PRF&) = default;
};

class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SpanInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

bool spans_match(const Span& gold, const Span& pred, MatchMode mode);

// Maximum one-to-one matching size between two span sets of one utterance.
// Throws SpanInputError if either side has overlapping or empty spans.
std::size_t match_count(std::span<const Span> gold, std::span<const Span> pred, MatchMode mode);

using SpanSets = std::vector<std::vector<Span>>;

PRF span_f1(const SpanSets& gold, const SpanSets& pred, MatchMode mode);

double intent_accuracy(const Dataset& gold, const Dataset& pred);

enum class GroupBy { kNone, kVariety };

struct ScoreBundle {
  std::size_t utterances = 0;
  std::size_t intents_correct = 0;
  PRF strict;
  PRF loose;
  PRF unlabelled;
  PRF unlabelled_overlap;

  double intent_accuracy() const;
  const PRF& get(MatchMode mode) const;
  ScoreBundle& operator+=(const ScoreBundle& o);
  friend bool operator==(const ScoreBundle&, const ScoreBundle&) = default;
};

struct EvalReport {
  ScoreBundle overall;
  std::map<std::string, ScoreBundle> per_group;
  // Modes to include when rendering; all four are always computed.
  std::vector<MatchMode> modes{MatchMode::kStrict, MatchMode::kLoose, MatchMode::kUnlabelled};
};

struct EvalOptions {
  RepairPolicy repair = RepairPolicy::kLenient;
  GroupBy group_by = GroupBy::kNone;
};

// Pairs utterances by id. Throws AlignmentError on size mismatch, missing
// ids, or token-count mismatch.
EvalReport evaluate(const Dataset& gold, const Dataset& pred, const EvalOptions& options = {});

}  // namespace dialsid
