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

// Spelling normalization for dialectological transcriptions.
//
// Three rules, applied in order:
//   1. tjukk-l: uppercase 'L' becomes 'l'.
//   2. apostrophe: apostrophes (' and U+2019) are removed.
//   3. A doubled consonant followed by another consonant loses one of its
//      letters (C1C1C2 -> C1C2), except that "ssjt" -> "rst", "ssjk" -> "rsk",
//      and other clusters starting with "ssj" or "kkj" are kept. Rule 3 is
//      re-run from the start of the token until nothing changes.
//
// Consonants are b c d f g h j k l m n p q r s t v w x z, matched without
// regard to case. Everything else, including æ ø å y and hyphens, is a
// non-consonant.

#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dialsid/corpus.hpp"

namespace dialsid {

enum class NormRule { kTjukkL, kApostrophe, kSsjt, kSsjk, kDegeminate };

std::string_view to_string(NormRule rule);

struct RuleApplication {
  NormRule rule;
  std::size_t offset;  // byte offset in the string as it was when the rule fired

  friend bool operator==(const RuleApplication&, const RuleApplication&) = default;
};

struct RuleTrace {
  std::string input;
  std::string output;
  std::vector<RuleApplication> applied;
};

bool is_consonant(char c);

std::string normalize_token(std::string_view token, RuleTrace* trace = nullptr);

// Replays recorded rule applications on `input`.
std::string replay(std::string_view input, const std::vector<RuleApplication>& applied);

// Normalizes every whitespace-delimited token; whitespace is copied verbatim.
std::string normalize_text(std::string_view text, std::vector<RuleTrace>* traces = nullptr);
void normalize_stream(std::istream& in, std::ostream& out, std::vector<RuleTrace>* traces = nullptr);

// Normalizes the tokens of every utterance; tags, intents and ids are left
// alone; raw text is normalized as well. A token that would normalize to
// nothing (a lone apostrophe) is kept.
Dataset normalize_dataset(const Dataset& d, std::vector<RuleTrace>* traces = nullptr);

nlohmann::json to_json(const RuleTrace& trace);

}  // namespace dialsid
