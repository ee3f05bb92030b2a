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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "dialsid/stats.hpp"
#include "dialsid/subword.hpp"
#include "support.hpp"

using namespace dialsid;
using testing::direct_pearson;
using testing::random_vector;

namespace {

SubwordVocab vocab(std::initializer_list<const char*> v) {
  std::unordered_set<std::string> s(v.begin(), v.end());
  s.insert("[UNK]");
  return SubwordVocab(std::move(s));
}

std::vector<std::string> pieces(std::initializer_list<const char*> v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("greedy longest-match tokenization") {
  CHECK(tokenize_word(vocab({"hei", "du"}), "hei") == pieces({"hei"}));
  CHECK(tokenize_word(vocab({"he", "##i"}), "hei") == pieces({"he", "##i"}));
  CHECK(tokenize_word(vocab({"he", "##i"}), "heq") == pieces({"[UNK]"}));
  CHECK(tokenize_word(vocab({"h", "he", "##ei", "##i"}), "hei") == pieces({"he", "##i"}));
  CHECK(tokenize_word(vocab({"m", "##ø", "##r", "##k"}), "mørk") == pieces({"m", "##ø", "##r", "##k"}));
  CHECK(tokenize_word(vocab({"hei"}), "du") == pieces({"[UNK]"}));
}

TEST_CASE("pieces rebuild the word when no unk is produced") {
  const SubwordVocab v = vocab({"k", "kj", "##ø", "##p", "##pe", "##e", "må", "##l", "##k", "##lk", "##j", "##ø"});
  for (const char* w : {"kjøpe", "mjølk", "kjøp", "målk"}) {
    const auto p = tokenize_word(v, w);
    if (p == pieces({"[UNK]"})) continue;
    std::string joined;
    for (std::size_t i = 0; i < p.size(); ++i) joined += i == 0 ? p[i] : p[i].substr(2);
    CHECK(joined == w);
  }
}

TEST_CASE("vocab loading and validation") {
  std::istringstream in("[UNK]\r\nhei\n\n##i\n");
  const SubwordVocab v = SubwordVocab::load(in);
  CHECK(v.size() == 3);
  CHECK(v.contains("##i"));
  CHECK_THROWS_AS(SubwordVocab({"hei"}), std::invalid_argument);
}

TEST_CASE("split-word ratio") {
  const SubwordVocab v = vocab({"hei", "du", "##u"});
  CHECK(split_word_ratio_text(v, "hei du hei") == 0.0);
  CHECK(split_word_ratio_text(vocab({"hei"}), "hei du") == 0.5);
  CHECK_THROWS_AS(split_word_ratio_text(v, "   "), std::invalid_argument);

  // Counts are additive, so the ratio of A ++ B is the weighted mean.
  const SubwordVocab w = vocab({"hei", "d", "##u", "kjøp"});
  const SplitCounts a = split_counts_text(w, "hei du kjøpe 9");
  const SplitCounts b = split_counts_text(w, "du du hei");
  SplitCounts ab = split_counts_text(w, "hei du kjøpe 9 du du hei");
  CHECK(ab.split == a.split + b.split);
  CHECK(ab.total == a.total + b.total);
  CHECK(ab.ratio() == doctest::Approx((a.ratio() * a.total + b.ratio() * b.total) / (a.total + b.total)));

  const SplitCounts letters = split_counts_text(w, "hei du kjøpe 9", WordFilter{true});
  CHECK(letters.total == 3);
}

TEST_CASE("ratio difference") {
  const SubwordVocab v = vocab({"hei", "d", "##u"});
  Dataset a, b;
  Utterance u;
  u.id = "1";
  u.tokens = {"hei", "du", "hallo"};
  u.slot_tags = {"O", "O", "O"};
  a.utterances.push_back(u);
  u.tokens = {"hei", "hei", "hallo", "x"};
  u.slot_tags = {"O", "O", "O", "O"};
  b.utterances.push_back(u);
  CHECK(ratio_difference(v, a, a) == 0.0);
  CHECK(ratio_difference(v, a, b) == ratio_difference(v, b, a));
  CHECK(ratio_difference(v, a, b) == doctest::Approx(2.0 / 3.0 - 0.5));
}

TEST_CASE("t CDF matches numeric integration") {
  for (int df = 1; df <= 30; ++df) {
    for (double t : {-7.5, -2.2, -1.0, -0.3, 0.0, 0.4, 1.3, 2.0, 3.7, 12.0}) {
      CAPTURE(df);
      CAPTURE(t);
      CHECK(std::abs(student_t_cdf(t, df) - testing::quadrature_t_cdf(t, df)) < 1e-8);
    }
  }
}

TEST_CASE("p-values for twelve observations") {
  CHECK(std::round(correlation_p_value(-0.51, 12) * 100) / 100 == doctest::Approx(0.09));
  CHECK(std::round(correlation_p_value(-0.60, 12) * 100) / 100 == doctest::Approx(0.04));
  double prev = 1.0;
  for (double r = 0.0; r < 0.99; r += 0.05) {
    const double p = correlation_p_value(r, 12);
    CHECK(p <= prev);
    CHECK(p == doctest::Approx(correlation_p_value(-r, 12)));
    prev = p;
  }
  CHECK(correlation_p_value(1.0, 12) == 0.0);
  CHECK(correlation_p_value(0.0, 12) == doctest::Approx(1.0));
}

TEST_CASE("Pearson against direct summation") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + gen() % 12;
    const auto x = random_vector(gen, n);
    const auto y = random_vector(gen, n);
    CHECK(std::abs(pearson(x, y).coefficient - direct_pearson(x, y)) < 1e-12);
  }
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(2 * v + 1);
  CHECK(pearson(x, y).coefficient == doctest::Approx(1.0));
  CHECK_THROWS_AS(pearson(x, std::vector<double>(5, 3.0)), CorrelationError);
  CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2}), CorrelationError);
}

TEST_CASE("Eigen expressions are accepted directly") {
  Eigen::VectorXd x(5), y(5);
  x << 1, 2, 3, 4, 5;
  y << 2, 1, 4, 3, 6;
  const double direct = direct_pearson({1, 2, 3, 4, 5}, {2, 1, 4, 3, 6});
  CHECK(pearson_r(x, y) == doctest::Approx(direct).epsilon(1e-14));
  CHECK(pearson_r(x.array() * 3.0 + 1.0, y) == doctest::Approx(direct).epsilon(1e-14));
  CHECK(pearson_r(-x, y) == doctest::Approx(-direct).epsilon(1e-14));
}

TEST_CASE("Spearman ranks, ties and invariances") {
  Eigen::VectorXd v(4);
  v << 1, 2, 2, 3;
  const Eigen::VectorXd r = average_ranks(v);
  CHECK(r(0) == 1.0);
  CHECK(r(1) == 2.5);
  CHECK(r(2) == 2.5);
  CHECK(r(3) == 4.0);

  const std::vector<double> x{0.1, 0.4, 0.2, 0.9, 0.5};
  std::vector<double> y;
  for (double a : x) y.push_back(std::exp(3 * a));
  CHECK(spearman(x, y).coefficient == doctest::Approx(1.0));

  std::mt19937_64 gen(12);
  const auto a = random_vector(gen, 12);
  const auto b = random_vector(gen, 12);
  std::vector<double> b_cubed;
  for (double t : b) b_cubed.push_back(t * t * t);
  CHECK(spearman(a, b).coefficient == doctest::Approx(spearman(a, b_cubed).coefficient).epsilon(1e-14));
}

TEST_CASE("Spearman against counted ranks") {
  std::mt19937_64 gen(44);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + gen() % 12;
    auto x = random_vector(gen, n);
    auto y = random_vector(gen, n);
    // Coarse rounding forces ties.
    if (trial % 2 == 0) {
      for (auto& v : x) v = std::round(v);
      for (auto& v : y) v = std::round(v);
    }
    const double expected = testing::direct_spearman(x, y);
    if (!std::isfinite(expected)) continue;
    CHECK(std::abs(spearman(x, y).coefficient - expected) < 1e-12);
  }
}

TEST_CASE("exact permutation p") {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{1, 2, 3, 4};
  // Only the identity and its reversal reach |rho| = 1 among 24 orders.
  CHECK(spearman(x, y, SpearmanPValue::kExactPermutation).p_value == doctest::Approx(2.0 / 24.0));
  std::vector<double> eleven(11);
  std::iota(eleven.begin(), eleven.end(), 0.0);
  CHECK_THROWS_AS(spearman(eleven, eleven, SpearmanPValue::kExactPermutation), CorrelationError);
}

TEST_CASE("correlate bundles both statistics") {
  const std::vector<double> x{0.30, 0.18, 0.25, 0.05, 0.12, 0.22};
  const std::vector<double> y{60.1, 71.3, 66.0, 80.2, 75.5, 68.0};
  const CorrelationResult c = correlate(x, y);
  CHECK(c.n == 6);
  CHECK(c.r < 0);
  CHECK(c.rho == doctest::Approx(-1.0));
  CHECK(c.p_r > 0);
  CHECK(c.p_r < 1);
}
