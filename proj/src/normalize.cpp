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

#include "dialsid/normalize.hpp"

#include <iterator>
#include <optional>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dialsid {
namespace {

constexpr std::string_view kRightSingleQuote = "\xE2\x80\x99";

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

char with_case_of(char letter, char model) {
  return is_upper(model) ? static_cast<char>(letter - 'a' + 'A') : letter;
}

bool lower_equals(std::string_view s, std::size_t at, std::string_view pattern) {
  if (at + pattern.size() > s.size()) return false;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (lower(s[at + i]) != pattern[i]) return false;
  }
  return true;
}

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

// Applies one rule at `offset`, mutating s.
void apply_rule(std::string& s, const RuleApplication& a) {
  auto need = [&](std::size_t n) {
    if (a.offset + n > s.size()) throw std::out_of_range("rule offset past end of string");
  };
  switch (a.rule) {
    case NormRule::kTjukkL:
      need(1);
      if (s[a.offset] != 'L') throw std::invalid_argument("tjukk-l replay mismatch");
      s[a.offset] = 'l';
      break;
    case NormRule::kApostrophe:
      need(1);
      if (s[a.offset] == '\'') {
        s.erase(a.offset, 1);
      } else if (s.compare(a.offset, kRightSingleQuote.size(), kRightSingleQuote) == 0) {
        s.erase(a.offset, kRightSingleQuote.size());
      } else {
        throw std::invalid_argument("apostrophe replay mismatch");
      }
      break;
    case NormRule::kSsjt:
    case NormRule::kSsjk: {
      need(4);
      // "ssjX" -> "rsX", keeping the case of each retained position.
      const char r = with_case_of('r', s[a.offset]);
      s.replace(a.offset, 3, std::string{r, s[a.offset + 1]});
      break;
    }
    case NormRule::kDegeminate:
      need(3);
      s.erase(a.offset, 1);
      break;
  }
}

// Finds the first position where rule 3 rewrites, starting the scan at 0.
std::optional<RuleApplication> find_cluster_rule(std::string_view s) {
  for (std::size_t i = 0; i + 2 < s.size(); ++i) {
    if (!is_consonant(s[i]) || lower(s[i]) != lower(s[i + 1]) || !is_consonant(s[i + 2])) {
      continue;
    }
    if (lower_equals(s, i, "ssjt")) return RuleApplication{NormRule::kSsjt, i};
    if (lower_equals(s, i, "ssjk")) return RuleApplication{NormRule::kSsjk, i};
    if (lower_equals(s, i, "ssj") || lower_equals(s, i, "kkj")) continue;
    return RuleApplication{NormRule::kDegeminate, i};
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(NormRule rule) {
  switch (rule) {
    case NormRule::kTjukkL: return "tjukk-l";
    case NormRule::kApostrophe: return "apostrophe";
    case NormRule::kSsjt: return "ssjt";
    case NormRule::kSsjk: return "ssjk";
    case NormRule::kDegeminate: return "degeminate";
  }
  return "unknown";
}

bool is_consonant(char c) {
  switch (lower(c)) {
    case 'b': case 'c': case 'd': case 'f': case 'g': case 'h': case 'j':
    case 'k': case 'l': case 'm': case 'n': case 'p': case 'q': case 'r':
    case 's': case 't': case 'v': case 'w': case 'x': case 'z':
      return true;
    default:
      return false;
  }
}

std::string normalize_token(std::string_view token, RuleTrace* trace) {
  std::string s(token);
  std::vector<RuleApplication> applied;
  auto fire = [&](RuleApplication a) {
    apply_rule(s, a);
    applied.push_back(a);
  };

  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == 'L') fire({NormRule::kTjukkL, i});
  }
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == '\'' || s.compare(i, kRightSingleQuote.size(), kRightSingleQuote) == 0) {
      fire({NormRule::kApostrophe, i});
    } else {
      ++i;
    }
  }
  // Every rewrite shortens s, so this terminates.
  while (auto a = find_cluster_rule(s)) fire(*a);

  if (trace) {
    trace->input = std::string(token);
    trace->output = s;
    trace->applied = std::move(applied);
  }
  return s;
}

std::string replay(std::string_view input, const std::vector<RuleApplication>& applied) {
  std::string s(input);
  for (const auto& a : applied) apply_rule(s, a);
  return s;
}

std::string normalize_text(std::string_view text, std::vector<RuleTrace>* traces) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_ws(text[i])) {
      out.push_back(text[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !is_ws(text[j])) ++j;
    if (traces) {
      RuleTrace t;
      out += normalize_token(text.substr(i, j - i), &t);
      if (!t.applied.empty()) traces->push_back(std::move(t));
    } else {
      out += normalize_token(text.substr(i, j - i));
    }
    i = j;
  }
  return out;
}

void normalize_stream(std::istream& in, std::ostream& out, std::vector<RuleTrace>* traces) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  out << normalize_text(text, traces);
}

Dataset normalize_dataset(const Dataset& d, std::vector<RuleTrace>* traces) {
  Dataset out = d;
  for (auto& u : out.utterances) {
    for (auto& token : u.tokens) {
      RuleTrace trace;
      std::string normalized = normalize_token(token, &trace);
      if (normalized.empty()) continue;
      token = std::move(normalized);
      if (traces) traces->push_back(std::move(trace));
    }
    if (u.raw_text) u.raw_text = normalize_text(*u.raw_text);
  }
  return out;
}

nlohmann::json to_json(const RuleTrace& trace) {
  nlohmann::json applied = nlohmann::json::array();
  for (const auto& a : trace.applied) {
    applied.push_back({{"rule", std::string(to_string(a.rule))}, {"offset", a.offset}});
  }
  return {{"input", trace.input}, {"output", trace.output}, {"applied", std::move(applied)}};
}

}  // namespace dialsid
