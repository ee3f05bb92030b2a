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

// Greedy longest-match subword segmentation over a plain vocabulary list and
// the split-word ratio it induces on a corpus.

#pragma once

#include <istream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dialsid/corpus.hpp"

namespace dialsid {

class SubwordVocab {
 public:
  // Throws std::invalid_argument if `tokens` is empty or lacks `unk_token`.
  SubwordVocab(std::unordered_set<std::string> tokens, std::string continuation_marker = "##",
               std::string unk_token = "[UNK]");

  // One entry per line; blank lines are skipped and trailing CR stripped.
  static SubwordVocab load(std::istream& in, std::string continuation_marker = "##",
                           std::string unk_token = "[UNK]");
  static SubwordVocab load_file(const std::string& path, std::string continuation_marker = "##",
                                std::string unk_token = "[UNK]");

  bool contains(std::string_view piece) const;
  const std::string& continuation_marker() const { return marker_; }
  const std::string& unk_token() const { return unk_; }
  std::size_t size() const { return tokens_.size(); }

 private:
  std::unordered_set<std::string> tokens_;
  std::string marker_;
  std::string unk_;
};

// Longest match first, left to right. Pieces after the first carry the
// continuation marker. Returns {unk} when some suffix cannot be matched.
std::vector<std::string> tokenize_word(const SubwordVocab& v, std::string_view word);

struct SplitCounts {
  std::size_t split = 0;  // segmented into >1 piece, or unknown
  std::size_t total = 0;

  double ratio() const;  // throws std::invalid_argument when total == 0
  SplitCounts& operator+=(const SplitCounts& o) {
    split += o.split;
    total += o.total;
    return *this;
  }
};

struct WordFilter {
  // Count only tokens made entirely of letters.
  bool letters_only = false;
};

bool is_split(const SubwordVocab& v, std::string_view word);

SplitCounts split_counts(const SubwordVocab& v, std::span<const std::string> words,
                         const WordFilter& filter = {});
SplitCounts split_counts(const SubwordVocab& v, const Dataset& d, const WordFilter& filter = {});
// Whitespace-delimited words of free text.
SplitCounts split_counts_text(const SubwordVocab& v, std::string_view text,
                              const WordFilter& filter = {});

double split_word_ratio(const SubwordVocab& v, const Dataset& d, const WordFilter& filter = {});
double split_word_ratio_text(const SubwordVocab& v, std::string_view text,
                             const WordFilter& filter = {});

// |ratio(train) - ratio(eval)|
double ratio_difference(const SubwordVocab& v, const Dataset& train, const Dataset& eval,
                        const WordFilter& filter = {});

}  // namespace dialsid
