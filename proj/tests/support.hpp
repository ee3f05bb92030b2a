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

// Test fixtures and reference implementations. The references here are
// written from the definitions, deliberately without sharing code with the
// library, and are only fast enough for small inputs.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "dialsid/checkpoint.hpp"
#include "dialsid/corpus.hpp"
#include "dialsid/eval.hpp"

namespace testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("dialsid-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

// ---------------------------------------------------------------------------
// Span extraction, from the definition: a span starts at B-X, or at an I-X
// whose predecessor is not B-X / I-X; it continues over following I-X. Any
// other string is O.

inline std::vector<dialsid::Span> reference_spans(const std::vector<std::string>& tags) {
  auto label_of = [](const std::string& t) -> std::string {
    if (t.size() > 2 && (t[0] == 'B' || t[0] == 'I') && t[1] == '-') return t.substr(2);
    return {};
  };
  auto is_b = [&](const std::string& t) { return t.size() > 2 && t[0] == 'B' && t[1] == '-'; };
  auto is_i = [&](const std::string& t) { return t.size() > 2 && t[0] == 'I' && t[1] == '-'; };

  std::vector<dialsid::Span> out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string label = label_of(tags[i]);
    if (label.empty()) continue;
    const bool continues =
        is_i(tags[i]) && i > 0 && label_of(tags[i - 1]) == label && (is_b(tags[i - 1]) || is_i(tags[i - 1]));
    if (continues) continue;
    std::size_t end = i + 1;
    while (end < tags.size() && is_i(tags[end]) && label_of(tags[end]) == label) ++end;
    out.push_back({i, end, label});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matching, by exhaustive search over every one-to-one assignment.

inline bool reference_match(const dialsid::Span& g, const dialsid::Span& p, dialsid::MatchMode mode) {
  const bool same_bounds = g.start == p.start && g.end == p.end;
  bool overlap = false;
  for (std::size_t t = g.start; t < g.end; ++t) overlap = overlap || (t >= p.start && t < p.end);
  switch (mode) {
    case dialsid::MatchMode::kStrict: return same_bounds && g.label == p.label;
    case dialsid::MatchMode::kLoose: return overlap && g.label == p.label;
    case dialsid::MatchMode::kUnlabelled: return same_bounds;
    case dialsid::MatchMode::kUnlabelledOverlap: return overlap;
  }
  return false;
}

inline std::size_t reference_matching(const std::vector<dialsid::Span>& gold,
                                      const std::vector<dialsid::Span>& pred, dialsid::MatchMode mode) {
  std::vector<bool> used(gold.size(), false);
  std::function<std::size_t(std::size_t)> best = [&](std::size_t i) -> std::size_t {
    if (i == pred.size()) return 0;
    std::size_t result = best(i + 1);  // pred[i] unmatched
    for (std::size_t g = 0; g < gold.size(); ++g) {
      if (used[g] || !reference_match(gold[g], pred[i], mode)) continue;
      used[g] = true;
      result = std::max(result, 1 + best(i + 1));
      used[g] = false;
    }
    return result;
  };
  return best(0);
}

// ---------------------------------------------------------------------------
// Random data.

inline std::vector<std::string> random_bio(std::mt19937_64& gen, std::size_t length,
                                           const std::vector<std::string>& labels) {
  std::vector<std::string> tags(length, "O");
  std::uniform_int_distribution<int> coin(0, 2);
  std::size_t i = 0;
  while (i < length) {
    if (coin(gen) == 0) {
      const std::string& label = labels[gen() % labels.size()];
      const std::size_t len = 1 + gen() % std::min<std::size_t>(3, length - i);
      tags[i] = "B-" + label;
      for (std::size_t k = 1; k < len; ++k) tags[i + k] = "I-" + label;
      i += len;
    } else {
      ++i;
    }
  }
  return tags;
}

// Well-formed utterance with `length` tokens drawn from a small vocabulary.
inline dialsid::Utterance random_utterance(std::mt19937_64& gen, std::string id, std::size_t length,
                                           const std::vector<std::string>& labels) {
  static const std::vector<std::string> words{"minn", "mæ", "om", "å", "kjøpe", "mjølk", "koss",
                                              "blir", "været", "i", "Bergen", "9", "kl.", "dæ",
                                              "søndag", "hæ", "vekkerklokka", "ti", "på", "åtte"};
  dialsid::Utterance u;
  u.id = std::move(id);
  for (std::size_t i = 0; i < length; ++i) u.tokens.push_back(words[gen() % words.size()]);
  u.slot_tags = random_bio(gen, length, labels);
  static const std::vector<std::string> intents{"weather/find", "alarm/set_alarm",
                                                "reminder/set_reminder"};
  u.intent = intents[gen() % intents.size()];
  return u;
}

// ---------------------------------------------------------------------------
// Numeric references.

inline std::size_t levenshtein(const std::u32string& a, const std::u32string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline double t_pdf(double x, double df) {
  const double log_c = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * std::numbers::pi);
  return std::exp(log_c - (df + 1) / 2 * std::log1p(x * x / df));
}

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth) {
  const double m = (a + b) / 2, lm = (a + m) / 2, rm = (m + b) / 2;
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
  return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

// Student t CDF by adaptive Simpson integration of the density.
inline double quadrature_t_cdf(double t, double df) {
  auto f = [df](double x) { return t_pdf(x, df); };
  const double a = 0, b = std::abs(t);
  const double fa = f(a), fb = f(b), fm = f((a + b) / 2);
  const double area = simpson(f, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), 1e-13, 50);
  return t >= 0 ? 0.5 + area : 0.5 - area;
}

inline double direct_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Ranks by counting: 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> direct_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double v : x) {
      less += v < x[i];
      equal += v == x[i];
    }
    r[i] = 1 + less + (equal - 1) / 2;
  }
  return r;
}

inline double direct_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return direct_pearson(direct_ranks(x), direct_ranks(y));
}

inline std::vector<double> random_vector(std::mt19937_64& gen, std::size_t n) {
  std::normal_distribution<double> d(0.0, 3.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

// ---------------------------------------------------------------------------
// Synthetic checkpoints in BERT-style naming.

inline std::vector<std::byte> f32_bytes(const std::vector<float>& v) {
  std::vector<std::byte> out(v.size() * sizeof(float));
  std::memcpy(out.data(), v.data(), out.size());
  return out;
}

struct SyntheticModel {
  std::size_t layers = 12;
  std::size_t width = 4;
};

inline std::vector<std::string> synthetic_names(const SyntheticModel& m) {
  std::vector<std::string> names{"embeddings.word_embeddings.weight", "embeddings.LayerNorm.weight"};
  for (std::size_t i = 0; i < m.layers; ++i) {
    const std::string p = "encoder.layer." + std::to_string(i) + ".";
    names.push_back(p + "attention.self.query.weight");
    names.push_back(p + "attention.self.query.bias");
    names.push_back(p + "output.dense.weight");
  }
  names.push_back("intent_classifier.weight");
  names.push_back("slot_classifier.bias");
  return names;
}

// Tensor values are value(name_index, element_index).
inline dialsid::CheckpointPlan synthetic_plan(const SyntheticModel& m,
                                              const std::function<float(std::size_t, std::size_t)>& value,
                                              std::map<std::string, std::string> metadata = {{"format", "pt"}}) {
  dialsid::CheckpointPlan plan;
  plan.metadata = std::move(metadata);
  const auto names = synthetic_names(m);
  for (std::size_t n = 0; n < names.size(); ++n) {
    const bool vector = names[n].ends_with(".bias") || names[n].ends_with("LayerNorm.weight");
    std::vector<std::uint64_t> shape = vector ? std::vector<std::uint64_t>{m.width}
                                              : std::vector<std::uint64_t>{m.width, m.width};
    std::size_t count = 1;
    for (auto d : shape) count *= d;
    std::vector<float> v(count);
    for (std::size_t k = 0; k < count; ++k) v[k] = value(n, k);
    plan.tensors.push_back({names[n], dialsid::DType::kF32, shape, f32_bytes(v)});
  }
  return plan;
}

inline float pseudo_random(std::uint64_t seed, std::size_t n, std::size_t k) {
  std::mt19937_64 gen(seed * 1000003 + n * 7919 + k);
  return std::uniform_real_distribution<float>(-1.0f, 1.0f)(gen);
}

inline std::string write_synthetic(const std::string& path, const SyntheticModel& m, std::uint64_t seed) {
  dialsid::write_checkpoint(
      synthetic_plan(m, [&](std::size_t n, std::size_t k) { return pseudo_random(seed, n, k); }), path);
  return path;
}

}  // namespace testing
