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

#pragma once

#include <w2bq/vectors.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <stdexcept>
#include <vector>

namespace w2bq {

// ---------------------------------------------------------------------------
// Metrics

/// x.y / (|x| |y|). Throws UndefinedMetricError if either vector is zero.
template <typename T>
double cosine(std::span<const T> x, std::span<const T> y) {
  if (x.size() != y.size()) throw std::invalid_argument("cosine of vectors with different lengths");
  double dot = 0, xx = 0, yy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += static_cast<double>(x[i]) * y[i];
    xx += static_cast<double>(x[i]) * x[i];
    yy += static_cast<double>(y[i]) * y[i];
  }
  if (xx == 0.0 || yy == 0.0) throw UndefinedMetricError("cosine of a zero vector is undefined");
  return std::clamp(dot / (std::sqrt(xx) * std::sqrt(yy)), -1.0, 1.0);
}

/// 1-based ranks, ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman's rho: Pearson correlation of the average ranks.
double spearman(std::span<const double> pred, std::span<const double> human);

// ---------------------------------------------------------------------------
// Datasets

struct SimilarityPair {
  std::string word1;
  std::string word2;
  double score = 0;
};

struct SimilarityDataset {
  std::string name;
  std::vector<SimilarityPair> pairs;
};

struct AnalogyQuestion {
  std::string a;       // a : a_star :: b : b_star
  std::string a_star;
  std::string b;
  std::string b_star;
  std::string category;
};

struct AnalogyDataset {
  std::string name;
  std::vector<AnalogyQuestion> questions;
};

/// `word1 word2 score` per line (tabs or spaces); '#' comments and a leading
/// header line are skipped.
SimilarityDataset load_similarity(std::istream& in, std::string name = "similarity");
SimilarityDataset load_similarity(const std::filesystem::path& path);

/// Four words per line; lines starting with ':' set the category.
AnalogyDataset load_analogy(std::istream& in, std::string name = "analogy");
AnalogyDataset load_analogy(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Evaluation

struct EvalResult {
  double score = 0;
  std::size_t evaluated = 0;
  std::size_t skipped_oov = 0;
};

/// Exact match first, then the ASCII-lowercased spelling.
std::optional<WordId> lookup_word(const WordVectors& vecs, std::string_view word);

/// Spearman correlation between cosine similarity and human scores over the
/// in-vocabulary pairs. Rows are normalized first.
EvalResult eval_similarity(const WordVectors& vecs, const SimilarityDataset& ds);

enum class AnalogyMethod { add, mul };

struct AnalogyOptions {
  /// Consider only the first N vocabulary words as candidates and query
  /// words (0 = the whole vocabulary).
  std::size_t restrict_vocab = 0;
  /// Questions scored per matrix product.
  std::size_t batch = 256;
};

/// 3CosMul constant.
inline constexpr double kCosMulEpsilon = 0.001;

/// Fraction of in-vocabulary questions whose argmax candidate (excluding
/// a, a*, b) is b*.
EvalResult eval_analogy(const WordVectors& vecs, const AnalogyDataset& ds, AnalogyMethod method,
                        const AnalogyOptions& options = {});

struct AnalogyScores {
  EvalResult add;
  EvalResult mul;
};

/// Both methods from one pass over the candidates.
AnalogyScores eval_analogy_both(const WordVectors& vecs, const AnalogyDataset& ds,
                                const AnalogyOptions& options = {});

struct Neighbor {
  WordId id = 0;
  std::string word;
  double score = 0;
};

struct NeighborLists {
  std::vector<Neighbor> closest;   // descending dot product
  std::vector<Neighbor> furthest;  // ascending dot product
};

/// Ranks every other word by dot product with `word`. Ties go to the lower id.
/// Unknown words raise an error suggesting the closest spellings.
NeighborLists neighbors(const WordVectors& vecs, std::string_view word, std::size_t n);

/// Levenshtein distance over bytes.
std::size_t edit_distance(std::string_view a, std::string_view b);

/// Up to `n` vocabulary words closest to `word` by edit distance.
std::vector<std::string> suggest_words(const WordVectors& vecs, std::string_view word,
                                       std::size_t n = 5);

/// `dataset<TAB>score<TAB>evaluated<TAB>skipped`
std::string format_result_tsv(const std::string& dataset, const EvalResult& result);

}  // namespace w2bq
