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

#include "dialsid/noise.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <set>

#include <nlohmann/json.hpp>

#include "dialsid/rng.hpp"
#include "dialsid/utf8.hpp"

namespace dialsid {

Alphabet::Alphabet(std::u32string chars) {
  for (char32_t c : chars) {
    if (!utf8::is_letter(c)) {
      throw std::invalid_argument("alphabet entry U+" + std::to_string(static_cast<std::uint32_t>(c)) +
                                  " is not a letter");
    }
  }
  std::sort(chars.begin(), chars.end());
  chars.erase(std::unique(chars.begin(), chars.end()), chars.end());
  chars_ = std::move(chars);
}

bool Alphabet::contains(char32_t c) const {
  return std::binary_search(chars_.begin(), chars_.end(), c);
}

std::string Alphabet::to_utf8() const { return utf8::encode(chars_); }

Alphabet build_alphabet(std::string_view reference) {
  std::set<char32_t> letters;
  for (char32_t c : utf8::decode(reference)) {
    if (utf8::is_letter(c)) letters.insert(c);
  }
  return Alphabet(std::u32string(letters.begin(), letters.end()));
}

Alphabet build_alphabet(std::istream& reference) {
  std::string text{std::istreambuf_iterator<char>(reference), std::istreambuf_iterator<char>()};
  return build_alphabet(std::string_view(text));
}

Alphabet build_alphabet(const Dataset& reference) {
  std::string text;
  for (const auto& u : reference.utterances) {
    for (const auto& t : u.tokens) {
      text += t;
      text += ' ';
    }
  }
  return build_alphabet(std::string_view(text));
}

std::string_view to_string(NoiseOp op) {
  switch (op) {
    case NoiseOp::kDelete: return "delete";
    case NoiseOp::kInsert: return "insert";
    case NoiseOp::kBoth: return "both";
  }
  return "unknown";
}

std::string noise_word(std::string_view word, NoiseOp op, std::size_t position,
                       char32_t insert_char) {
  auto cps = utf8::decode(word);
  const std::size_t len = cps.size();
  if (len == 0) throw NoiseError("cannot noise an empty word");
  switch (op) {
    case NoiseOp::kDelete:
    case NoiseOp::kBoth:
      if (len == 1) {
        throw NoiseError("deletion on a single-character word would empty the token");
      }
      if (position >= len) {
        throw NoiseError("position " + std::to_string(position) + " out of range for '" +
                         std::string(word) + "'");
      }
      if (op == NoiseOp::kDelete) {
        cps.erase(position, 1);
      } else {
        cps[position] = insert_char;
      }
      break;
    case NoiseOp::kInsert:
      if (position > len) {
        throw NoiseError("insert position " + std::to_string(position) + " out of range for '" +
                         std::string(word) + "'");
      }
      cps.insert(cps.begin() + static_cast<std::ptrdiff_t>(position), insert_char);
      break;
  }
  return utf8::encode(cps);
}

void NoiseConfig::validate() const {
  if (!(word_fraction >= 0.0 && word_fraction <= 1.0)) {
    throw std::invalid_argument("word_fraction must lie in [0, 1]");
  }
  double total = 0.0;
  for (double w : op_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("op_weights must be finite and non-negative");
    }
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("op_weights must not all be zero");
}

NoiseConfig noise_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("noise config must be a JSON object");
  NoiseConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "word_fraction") {
      cfg.word_fraction = value.get<double>();
    } else if (key == "alphabet") {
      cfg.alphabet = Alphabet(utf8::decode(value.get<std::string>()));
    } else if (key == "seed") {
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "op_weights") {
      for (const auto& [op, w] : value.items()) {
        if (op == "delete") {
          cfg.op_weights[0] = w.get<double>();
        } else if (op == "insert") {
          cfg.op_weights[1] = w.get<double>();
        } else if (op == "both") {
          cfg.op_weights[2] = w.get<double>();
        } else {
          throw std::invalid_argument("unknown op_weights key '" + op + "'");
        }
      }
    } else {
      throw std::invalid_argument("unknown noise config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const NoiseConfig& cfg) {
  return {{"word_fraction", cfg.word_fraction},
          {"alphabet", cfg.alphabet.to_utf8()},
          {"op_weights",
           {{"delete", cfg.op_weights[0]}, {"insert", cfg.op_weights[1]}, {"both", cfg.op_weights[2]}}},
          {"seed", cfg.seed}};
}

std::size_t selected_word_count(double word_fraction, std::size_t alphabetic) {
  return std::min(alphabetic, round_half_up(word_fraction * static_cast<double>(alphabetic)));
}

Dataset noise_dataset(const Dataset& d, const NoiseConfig& cfg, std::vector<NoiseEdit>* edits) {
  cfg.validate();
  Dataset out = d;
  const std::array<double, 3> insert_only{0.0, 1.0, 0.0};

  for (std::size_t ui = 0; ui < out.utterances.size(); ++ui) {
    auto& u = out.utterances[ui];
    std::vector<std::size_t> eligible;
    for (std::size_t t = 0; t < u.tokens.size(); ++t) {
      if (utf8::is_alphabetic_word(u.tokens[t])) eligible.push_back(t);
    }
    const std::size_t k = selected_word_count(cfg.word_fraction, eligible.size());
    if (k == 0) continue;

    Rng rng = Rng::keyed(cfg.seed, u.id);
    // Partial Fisher-Yates: the first k entries become the selection.
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(eligible.size() - i));
      std::swap(eligible[i], eligible[j]);
    }
    std::vector<std::size_t> chosen(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(chosen.begin(), chosen.end());

    for (std::size_t t : chosen) {
      const std::string before = u.tokens[t];
      const std::size_t len = utf8::length(before);
      const auto op = static_cast<NoiseOp>(
          rng.weighted(len == 1 ? std::span<const double>(insert_only)
                                : std::span<const double>(cfg.op_weights)));
      const std::size_t position =
          static_cast<std::size_t>(rng.below(op == NoiseOp::kInsert ? len + 1 : len));
      char32_t ch = U'\0';
      if (op != NoiseOp::kDelete) {
        if (cfg.alphabet.empty()) {
          throw NoiseError("insertion drawn for '" + before + "' but the alphabet is empty");
        }
        const auto& letters = cfg.alphabet.chars();
        if (op == NoiseOp::kInsert) {
          ch = letters[static_cast<std::size_t>(rng.below(letters.size()))];
        } else {
          // A substitution always changes the letter it replaces.
          const char32_t replaced = utf8::decode(before)[position];
          const auto skip = letters.find(replaced);
          const std::size_t choices = letters.size() - (skip == std::u32string::npos ? 0 : 1);
          if (choices == 0) {
            throw NoiseError("no substitute for '" + utf8::encode(replaced) + "' in the alphabet");
          }
          auto idx = static_cast<std::size_t>(rng.below(choices));
          if (skip != std::u32string::npos && idx >= skip) ++idx;
          ch = letters[idx];
        }
      }
      u.tokens[t] = noise_word(before, op, position, ch);
      if (edits) edits->push_back(NoiseEdit{ui, t, op, position, ch, before, u.tokens[t]});
    }
  }
  return out;
}

}  // namespace dialsid
