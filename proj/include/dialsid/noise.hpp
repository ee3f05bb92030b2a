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

// Seeded character-level noise for training corpora.
//
// Within each utterance a fixed share of the alphabetic tokens is selected and
// each selected token gets one edit at a random position: a deletion, an
// insertion of a letter from the alphabet, or both at the same index (a
// substitution by a different letter). Token count, tags, intent and id never
// change, and every selected token ends up different from its source.

#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dialsid/corpus.hpp"

namespace dialsid {

// Ordered set of letter code points.
class Alphabet {
 public:
  Alphabet() = default;
  // Throws std::invalid_argument if any code point is not a letter.
  explicit Alphabet(std::u32string chars);

  const std::u32string& chars() const { return chars_; }
  bool empty() const { return chars_.empty(); }
  std::size_t size() const { return chars_.size(); }
  bool contains(char32_t c) const;
  std::string to_utf8() const;

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::u32string chars_;  // sorted, unique
};

// Distinct letters of the reference text, case preserved.
Alphabet build_alphabet(std::string_view reference);
Alphabet build_alphabet(std::istream& reference);
// Letters of the tokens of a dataset.
Alphabet build_alphabet(const Dataset& reference);

enum class NoiseOp { kDelete = 0, kInsert = 1, kBoth = 2 };

std::string_view to_string(NoiseOp op);

class NoiseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Applies one edit at a code-point position. Delete and both need
// position < length and length >= 2; insert needs position <= length.
std::string noise_word(std::string_view word, NoiseOp op, std::size_t position,
                       char32_t insert_char = U'\0');

struct NoiseConfig {
  double word_fraction = 0.0;
  Alphabet alphabet;
  // Relative weights of delete, insert and both.
  std::array<double, 3> op_weights{1.0, 1.0, 1.0};
  std::uint64_t seed = 0;

  // Throws std::invalid_argument when out of range.
  void validate() const;
};

// JSON form: {"word_fraction", "alphabet" (string), "op_weights"
// {"delete","insert","both"}, "seed"}. Unknown keys are rejected.
NoiseConfig noise_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NoiseConfig& cfg);

struct NoiseEdit {
  std::size_t utterance = 0;
  std::size_t token = 0;
  NoiseOp op = NoiseOp::kDelete;
  std::size_t position = 0;
  char32_t inserted = U'\0';
  std::string before;
  std::string after;
};

// Number of tokens that are noised for an utterance with `alphabetic` eligible tokens.
std::size_t selected_word_count(double word_fraction, std::size_t alphabetic);

// Randomness is keyed by (seed, utterance id), so an utterance gets the same
// edits wherever it appears in the corpus.
Dataset noise_dataset(const Dataset& d, const NoiseConfig& cfg,
                      std::vector<NoiseEdit>* edits = nullptr);

}  // namespace dialsid
