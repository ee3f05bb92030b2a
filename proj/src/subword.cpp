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

#include "dialsid/subword.hpp"

#include <cmath>
#include <fstream>

#include "dialsid/utf8.hpp"

namespace dialsid {

SubwordVocab::SubwordVocab(std::unordered_set<std::string> tokens, std::string continuation_marker,
                           std::string unk_token)
    : tokens_(std::move(tokens)), marker_(std::move(continuation_marker)), unk_(std::move(unk_token)) {
  if (tokens_.empty()) throw std::invalid_argument("subword vocabulary is empty");
  if (!tokens_.contains(unk_)) {
    throw std::invalid_argument("subword vocabulary lacks the unknown token '" + unk_ + "'");
  }
}

SubwordVocab SubwordVocab::load(std::istream& in, std::string continuation_marker,
                                std::string unk_token) {
  std::unordered_set<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    tokens.insert(line);
  }
  return SubwordVocab(std::move(tokens), std::move(continuation_marker), std::move(unk_token));
}

SubwordVocab SubwordVocab::load_file(const std::string& path, std::string continuation_marker,
                                     std::string unk_token) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open vocabulary '" + path + "'");
  return load(in, std::move(continuation_marker), std::move(unk_token));
}

bool SubwordVocab::contains(std::string_view piece) const {
  return tokens_.contains(std::string(piece));
}

std::vector<std::string> tokenize_word(const SubwordVocab& v, std::string_view word) {
  if (word.empty()) return {};
  // Byte offsets of code point boundaries, so pieces never split a character.
  std::vector<std::size_t> bounds{0};
  std::size_t offset = 0;
  for (char32_t cp : utf8::decode(word)) {
    offset += utf8::encode(cp).size();
    bounds.push_back(offset);
  }

  std::vector<std::string> pieces;
  std::string candidate;
  std::size_t start = 0;  // index into bounds
  while (start + 1 < bounds.size()) {
    bool found = false;
    for (std::size_t end = bounds.size() - 1; end > start; --end) {
      candidate.clear();
      if (start > 0) candidate = v.continuation_marker();
      candidate.append(word.substr(bounds[start], bounds[end] - bounds[start]));
      if (v.contains(candidate)) {
        pieces.push_back(candidate);
        start = end;
        found = true;
        break;
      }
    }
    if (!found) return {v.unk_token()};
  }
  return pieces;
}

double SplitCounts::ratio() const {
  if (total == 0) throw std::invalid_argument("split-word ratio of an empty word list");
  return static_cast<double>(split) / static_cast<double>(total);
}

bool is_split(const SubwordVocab& v, std::string_view word) {
  const auto pieces = tokenize_word(v, word);
  return pieces.size() > 1 || (pieces.size() == 1 && pieces[0] == v.unk_token());
}

namespace {

bool counted(std::string_view word, const WordFilter& filter) {
  if (word.empty()) return false;
  return !filter.letters_only || utf8::is_alphabetic_word(word);
}

}  // namespace

SplitCounts split_counts(const SubwordVocab& v, std::span<const std::string> words,
                         const WordFilter& filter) {
  SplitCounts c;
  for (const auto& w : words) {
    if (!counted(w, filter)) continue;
    ++c.total;
    if (is_split(v, w)) ++c.split;
  }
  return c;
}

SplitCounts split_counts(const SubwordVocab& v, const Dataset& d, const WordFilter& filter) {
  SplitCounts c;
  for (const auto& u : d.utterances) c += split_counts(v, u.tokens, filter);
  return c;
}

SplitCounts split_counts_text(const SubwordVocab& v, std::string_view text,
                              const WordFilter& filter) {
  std::vector<std::string> words;
  std::size_t i = 0;
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; };
  while (i < text.size()) {
    while (i < text.size() && ws(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !ws(text[j])) ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return split_counts(v, words, filter);
}

double split_word_ratio(const SubwordVocab& v, const Dataset& d, const WordFilter& filter) {
  return split_counts(v, d, filter).ratio();
}

double split_word_ratio_text(const SubwordVocab& v, std::string_view text,
                             const WordFilter& filter) {
  return split_counts_text(v, text, filter).ratio();
}

double ratio_difference(const SubwordVocab& v, const Dataset& train, const Dataset& eval,
                        const WordFilter& filter) {
  return std::abs(split_word_ratio(v, train, filter) - split_word_ratio(v, eval, filter));
}

}  // namespace dialsid
