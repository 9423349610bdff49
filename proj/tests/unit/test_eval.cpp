// Copyright 2026 The w2bq Authors. All Rights Reserved.
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

#include <w2bq/eval.hpp>

#include "support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

using namespace w2bq;

namespace {

WordVectors make_vectors(std::vector<std::string> words, std::size_t d, std::vector<float> values) {
  const std::size_t v = words.size();
  return WordVectors(std::move(words), Matrix<float>(v, d, std::move(values)), BitLevel::full);
}

WordVectors from_rows(const std::vector<std::vector<float>>& rows) {
  std::vector<std::string> words;
  std::vector<float> values;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    words.push_back(oracle::alpha_name(i, "w"));
    values.insert(values.end(), rows[i].begin(), rows[i].end());
  }
  return make_vectors(std::move(words), rows.front().size(), std::move(values));
}

double spearman_of(const std::vector<double>& a, const std::vector<double>& b) {
  return spearman(std::span<const double>(a), std::span<const double>(b));
}

}  // namespace

TEST_CASE("cosine") {
  const std::vector<float> v = {0.3f, -1.2f, 2.0f};
  CHECK(cosine<float>(v, v) == doctest::Approx(1.0));
  const std::vector<float> e1 = {1, 0, 0}, e2 = {0, 1, 0}, zero = {0, 0, 0};
  CHECK(cosine<float>(e1, e2) == 0.0);
  CHECK_THROWS_AS(cosine<float>(e1, zero), UndefinedMetricError);

  std::mt19937_64 rng(5);
  for (std::size_t d : {1u, 7u, 64u, 300u}) {
    std::vector<float> ones(d, 1.0f / 3.0f);
    std::vector<float> flipped = ones;
    std::vector<std::size_t> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t m = rng() % (d + 1);
    for (std::size_t i = 0; i < m; ++i) flipped[idx[i]] = -flipped[idx[i]];
    const double expected = (static_cast<double>(d) - 2.0 * m) / static_cast<double>(d);
    CHECK(cosine<float>(ones, flipped) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(cosine<float>(ones, flipped) == doctest::Approx(oracle::cos_ref(ones, flipped)).epsilon(1e-12));
  }
}

TEST_CASE("spearman examples") {
  CHECK(spearman_of({1, 2, 3, 4}, {1, 2, 4, 3}) == doctest::Approx(0.8));
  CHECK(spearman_of({1, 2, 3}, {10, 20, 30}) == doctest::Approx(1.0));
  CHECK(spearman_of({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(spearman_of({1, 1, 1}, {1, 2, 3}), UndefinedMetricError);
  CHECK_THROWS_AS(spearman_of({1}, {1}), UndefinedMetricError);
  CHECK_THROWS_AS(spearman_of({1, 2}, {1, 2, 3}), std::invalid_argument);

  const std::vector<double> ties = {1, 2, 2, 3};
  const auto ranks = average_ranks(ties);
  CHECK(ranks == std::vector<double>{1, 2.5, 2.5, 4});
}

TEST_CASE("spearman matches the rank-formula oracle on all permutations up to n = 6") {
  for (std::size_t n = 2; n <= 6; ++n) {
    std::vector<double> base(n);
    std::iota(base.begin(), base.end(), 1.0);
    std::vector<double> perm = base;
    do {
      CHECK(spearman_of(base, perm) == doctest::Approx(oracle::spearman_rank_formula(base, perm)).epsilon(1e-12));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

TEST_CASE("spearman with ties matches the average-rank oracle") {
  // Every sequence over a 3-letter alphabet of length n, against a fixed
  // tie-free and a tied reference.
  for (std::size_t n = 2; n <= 6; ++n) {
    std::vector<double> ref(n), tied_ref(n);
    for (std::size_t i = 0; i < n; ++i) {
      ref[i] = static_cast<double>((i * 7) % n);
      tied_ref[i] = static_cast<double>(i / 2);
    }
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<double> x(n);
      std::size_t c = code;
      for (std::size_t i = 0; i < n; ++i, c /= 3) x[i] = static_cast<double>(c % 3);
      if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) {
        CHECK_THROWS_AS(spearman_of(x, ref), UndefinedMetricError);
        continue;
      }
      CHECK(spearman_of(x, ref) == doctest::Approx(oracle::spearman_average_rank(x, ref)).epsilon(1e-12));
      if (n < 3) continue;  // tied_ref is constant for n = 2
      CHECK(spearman_of(x, tied_ref) ==
            doctest::Approx(oracle::spearman_average_rank(x, tied_ref)).epsilon(1e-12));
    }
  }
}

TEST_CASE("spearman is invariant under strictly monotone transforms") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(30), b(30);
    for (auto& x : a) x = normal(rng);
    for (auto& x : b) x = std::round(normal(rng) * 2);  // ties
    const double rho = spearman_of(a, b);
    std::vector<double> ta(a.size()), tb(b.size());
    std::transform(a.begin(), a.end(), ta.begin(), [](double x) { return std::exp(x); });
    std::transform(b.begin(), b.end(), tb.begin(), [](double x) { return x * x * x - 4.0; });
    CHECK(spearman_of(ta, tb) == doctest::Approx(rho).epsilon(1e-12));
  }
}

TEST_CASE("similarity evaluation") {
  // a=(1,0), b=(2,1), c=(0,1): cos(a,b)=0.894, cos(a,c)=0, cos(b,c)=0.447.
  const auto vecs = make_vectors({"a", "b", "c"}, 2, {1, 0, 2, 1, 0, 1});
  SimilarityDataset ds{"toy", {{"a", "b", 5}, {"a", "c", 9}, {"b", "c", 1}}};
  // Predicted ranks (3,1,2) vs human ranks (2,3,1): 1 - 6*6/(3*8) = -0.5.
  auto r = eval_similarity(vecs, ds);
  CHECK(r.score == doctest::Approx(-0.5));
  CHECK(r.evaluated == 3);
  CHECK(r.skipped_oov == 0);

  ds.pairs = {{"a", "b", 9}, {"A", "C", 1}, {"b", "c", 5}, {"a", "zzz", 3}};
  r = eval_similarity(vecs, ds);
  CHECK(r.score == doctest::Approx(1.0));
  CHECK(r.evaluated == 3);
  CHECK(r.skipped_oov == 1);

  const SimilarityDataset oov{"oov", {{"x", "y", 1}, {"y", "z", 2}}};
  CHECK_THROWS_AS(eval_similarity(vecs, oov), UndefinedMetricError);
  try {
    eval_similarity(vecs, oov);
  } catch (const UndefinedMetricError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("lookup falls back to lowercase") {
  const auto vecs = make_vectors({"Paris", "paris", "london"}, 1, {1, 2, 3});
  CHECK(lookup_word(vecs, "Paris") == WordId{0});
  CHECK(lookup_word(vecs, "London") == WordId{2});
  CHECK_FALSE(lookup_word(vecs, "Rome").has_value());
}

TEST_CASE("analogy on the orthonormal toy vocabulary") {
  const float r = 1.0f / std::sqrt(2.0f);
  const auto vecs = make_vectors({"e", "f", "g", "h", "v"}, 4,
                                 {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, r, r, 0});
  AnalogyDataset ds{"toy", {{"e", "f", "g", "v", "x"}}};
  // Add: h scores 0, v scores sqrt(2). Mul: h 0.499, v 1.454.
  const auto both = eval_analogy_both(vecs, ds);
  CHECK(both.add.score == 1.0);
  CHECK(both.mul.score == 1.0);
  CHECK(eval_analogy(vecs, ds, AnalogyMethod::add).score == 1.0);
  CHECK(eval_analogy(vecs, ds, AnalogyMethod::mul).score == 1.0);

  ds.questions.push_back({"e", "f", "g", "h", "x"});
  ds.questions.push_back({"e", "f", "g", "nope", "x"});
  const auto mixed = eval_analogy_both(vecs, ds);
  CHECK(mixed.add.evaluated == 2);
  CHECK(mixed.add.skipped_oov == 1);
  CHECK(mixed.add.score == 0.5);

  const AnalogyDataset none{"none", {{"p", "q", "r", "s", "x"}}};
  CHECK_THROWS_AS(eval_analogy(vecs, none, AnalogyMethod::add), UndefinedMetricError);
}

TEST_CASE("analogy matches exhaustive scoring on random toy vocabularies") {
  std::mt19937_64 rng(8);
  std::normal_distribution<float> normal;
  std::size_t checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t v = 5 + trial % 6;  // 5..10 words
    const std::size_t d = 2 + trial % 5;
    std::vector<std::vector<float>> rows(v, std::vector<float>(d));
    for (auto& row : rows) {
      for (auto& x : row) x = normal(rng);
    }
    const auto vecs = from_rows(rows);
    std::vector<std::size_t> ids(v);
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    const std::size_t a = ids[0], as = ids[1], b = ids[2];
    for (bool mul : {false, true}) {
      const std::size_t expected = oracle::analogy_answer(rows, a, as, b, mul);
      // Every candidate as b*: exactly the oracle's answer is marked correct.
      AnalogyDataset ds{"rand", {}};
      for (std::size_t c = 0; c < v; ++c) {
        if (c == a || c == as || c == b) continue;
        ds.questions.push_back({vecs.word(a), vecs.word(as), vecs.word(b), vecs.word(c), ""});
      }
      const auto r = eval_analogy(vecs, ds, mul ? AnalogyMethod::mul : AnalogyMethod::add, {0, 3});
      CHECK(r.evaluated == v - 3);
      CHECK(r.score * static_cast<double>(r.evaluated) == doctest::Approx(1.0));
      std::size_t hits = 0;
      for (const auto& q : ds.questions) {
        const AnalogyDataset single{"one", {q}};
        const bool correct = eval_analogy(vecs, single, mul ? AnalogyMethod::mul : AnalogyMethod::add).score == 1.0;
        hits += correct;
        CHECK(correct == (q.b_star == vecs.word(static_cast<WordId>(expected))));
      }
      CHECK(hits == 1);
      ++checked;
    }
  }
  CHECK(checked == 600);
}

TEST_CASE("analogy answers are invariant under positive scaling") {
  std::mt19937_64 rng(10);
  std::normal_distribution<float> normal;
  std::vector<std::vector<float>> rows(40, std::vector<float>(6));
  for (auto& row : rows) {
    for (auto& x : row) x = normal(rng);
  }
  auto scaled = rows;
  for (auto& row : scaled) {
    for (auto& x : row) x *= 7.5f;
  }
  const auto vecs = from_rows(rows), big = from_rows(scaled);
  AnalogyDataset ds{"s", {}};
  for (int i = 0; i < 200; ++i) {
    std::vector<std::size_t> ids(40);
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    ds.questions.push_back({vecs.word(ids[0]), vecs.word(ids[1]), vecs.word(ids[2]), vecs.word(ids[3]), ""});
  }
  const auto x = eval_analogy_both(vecs, ds), y = eval_analogy_both(big, ds);
  CHECK(x.add.score == y.add.score);
  CHECK(x.mul.score == y.mul.score);

  const auto n1 = neighbors(vecs, vecs.word(0), 10), n2 = neighbors(big, vecs.word(0), 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(n1.closest[i].id == n2.closest[i].id);
    CHECK(n1.furthest[i].id == n2.furthest[i].id);
  }
}

TEST_CASE("restricting the analogy vocabulary") {
  const float r = 1.0f / std::sqrt(2.0f);
  const auto vecs = make_vectors({"e", "f", "g", "h", "v"}, 4,
                                 {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, r, r, 0});
  const AnalogyDataset ds{"toy", {{"e", "f", "g", "h", "x"}, {"e", "f", "g", "v", "x"}}};
  // With the first four words only, v is out of range and h becomes the answer.
  const auto res = eval_analogy(vecs, ds, AnalogyMethod::add, {4, 256});
  CHECK(res.evaluated == 1);
  CHECK(res.skipped_oov == 1);
  CHECK(res.score == 1.0);
}

TEST_CASE("neighbors") {
  const auto vecs = make_vectors({"t", "x", "y"}, 2, {1, 0, 2, 1, -1, 3});
  const auto n = neighbors(vecs, "t", 1);
  REQUIRE(n.closest.size() == 1);
  REQUIRE(n.furthest.size() == 1);
  CHECK(n.closest[0].word == "x");
  CHECK(n.closest[0].score == doctest::Approx(2.0));
  CHECK(n.furthest[0].word == "y");
  CHECK(n.furthest[0].score == doctest::Approx(-1.0));

  const auto all = neighbors(vecs, "t", 2);
  for (const auto& nb : all.closest) CHECK(nb.word != "t");
  for (const auto& nb : all.furthest) CHECK(nb.word != "t");
  CHECK_THROWS_AS(neighbors(vecs, "t", 3), std::invalid_argument);
  CHECK_THROWS_AS(neighbors(vecs, "t", 0), std::invalid_argument);
  try {
    neighbors(vecs, "tt", 1);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("t") != std::string::npos);
  }

  // Ties go to the lower id.
  const auto tied = make_vectors({"t", "p", "q", "r"}, 1, {1, 1, 1, 1});
  const auto tn = neighbors(tied, "t", 3);
  CHECK(tn.closest[0].id == 1);
  CHECK(tn.closest[2].id == 3);
  CHECK(tn.furthest[0].id == 1);
}

TEST_CASE("1-bit dot products follow the Hamming distance") {
  std::mt19937_64 rng(12);
  const std::size_t d = 37, v = 30;
  std::vector<float> values(v * d);
  for (auto& x : values) x = (rng() & 1) ? 1.0f / 3.0f : -1.0f / 3.0f;
  std::vector<std::string> words;
  for (std::size_t i = 0; i < v; ++i) words.push_back(oracle::alpha_name(i, "b"));
  const WordVectors vecs(words, Matrix<float>(v, d, values), BitLevel::one);
  const auto n = neighbors(vecs, words[0], v - 1);
  for (const auto& nb : n.closest) {
    std::size_t hamming = 0;
    for (std::size_t c = 0; c < d; ++c) hamming += (values[c] > 0) != (values[nb.id * d + c] > 0);
    CHECK(nb.score == doctest::Approx((static_cast<double>(d) - 2.0 * hamming) / 9.0).epsilon(1e-6));
  }
}

TEST_CASE("edit distance and suggestions") {
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(edit_distance("", "abc") == 3);
  CHECK(edit_distance("same", "same") == 0);
  const auto vecs = make_vectors({"apple", "apply", "banana"}, 1, {1, 2, 3});
  const auto s = suggest_words(vecs, "appel", 2);
  REQUIRE(s.size() == 2);
  CHECK(s[0] == "apple");
}

TEST_CASE("dataset loaders") {
  std::istringstream sim("# comment\nWord 1\tWord 2\tHuman (mean)\nlove\tsex\t6.77\ntiger cat 7.35\n");
  const auto s = load_similarity(sim, "ws");
  REQUIRE(s.pairs.size() == 2);
  CHECK(s.pairs[1].word1 == "tiger");
  CHECK(s.pairs[1].score == doctest::Approx(7.35));

  std::istringstream ana(": capital\nAthens Greece Baghdad Iraq\n: family\nboy girl brother sister\n");
  const auto a = load_analogy(ana, "ga");
  REQUIRE(a.questions.size() == 2);
  CHECK(a.questions[0].category == "capital");
  CHECK(a.questions[1].b_star == "sister");

  std::istringstream bad("a b c\n");
  CHECK_THROWS_AS(load_analogy(bad), FormatError);

  const std::filesystem::path data(W2BQ_DATA_DIR);
  CHECK(load_similarity(data / "wordsim353.tsv").pairs.size() == 353);
  const auto google = load_analogy(data / "questions-words.txt");
  CHECK(google.questions.size() == 19544);
  CHECK(google.questions.front().category == "capital-common-countries");
}

TEST_CASE("result line format") {
  CHECK(format_result_tsv("ws353", EvalResult{0.5, 300, 53}) == "ws353\t0.500000\t300\t53");
}
