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

#include <w2bq/error.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace w2bq {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string f; in >> f;) out.push_back(std::move(f));
  return out;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size() && std::isfinite(out);
  } catch (const std::exception&) {
    return false;
  }
}

std::string stem_of(const std::filesystem::path& path) { return path.stem().string(); }

using RowMajor = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> pred, std::span<const double> human) {
  if (pred.size() != human.size()) throw std::invalid_argument("spearman inputs differ in length");
  if (pred.size() < 2) throw UndefinedMetricError("spearman needs at least two pairs");
  const auto rx = average_ranks(pred);
  const auto ry = average_ranks(human);
  const double n = static_cast<double>(rx.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw UndefinedMetricError("spearman correlation is undefined for a constant list");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------

SimilarityDataset load_similarity(std::istream& in, std::string name) {
  SimilarityDataset ds{std::move(name), {}};
  std::string line;
  std::size_t lineno = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line) || line.front() == '#') continue;
    const auto f = split_fields(line);
    double score = 0;
    if (f.size() < 3 || !parse_double(f[2], score)) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      throw FormatError("similarity dataset line " + std::to_string(lineno) +
                        ": expected 'word1 word2 score'");
    }
    header_allowed = false;
    ds.pairs.push_back({f[0], f[1], score});
  }
  if (ds.pairs.empty()) throw FormatError("similarity dataset '" + ds.name + "' has no pairs");
  return ds;
}

SimilarityDataset load_similarity(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset " + path.string());
  return load_similarity(in, stem_of(path));
}

AnalogyDataset load_analogy(std::istream& in, std::string name) {
  AnalogyDataset ds{std::move(name), {}};
  std::string line;
  std::string category;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const auto f = split_fields(line);
    if (f.front().front() == ':') {
      category = line.substr(line.find(':') + 1);
      category.erase(0, category.find_first_not_of(" \t"));
      category.erase(category.find_last_not_of(" \t\r") + 1);
      continue;
    }
    if (f.size() != 4) {
      throw FormatError("analogy dataset line " + std::to_string(lineno) + ": expected four words");
    }
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = i + 1; j < 4; ++j) {
        if (f[i] == f[j]) {
          throw FormatError("analogy dataset line " + std::to_string(lineno) +
                            ": the four words must be distinct");
        }
      }
    }
    ds.questions.push_back({f[0], f[1], f[2], f[3], category});
  }
  if (ds.questions.empty()) throw FormatError("analogy dataset '" + ds.name + "' has no questions");
  return ds;
}

AnalogyDataset load_analogy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset " + path.string());
  return load_analogy(in, stem_of(path));
}

// ---------------------------------------------------------------------------

std::optional<WordId> lookup_word(const WordVectors& vecs, std::string_view word) {
  if (auto id = vecs.find(word)) return id;
  const std::string lower = ascii_lower(word);
  if (lower != word) return vecs.find(lower);
  return std::nullopt;
}

EvalResult eval_similarity(const WordVectors& vecs, const SimilarityDataset& ds) {
  const WordVectors unit = vecs.normalized() ? vecs : normalize_rows(vecs);
  std::vector<double> pred;
  std::vector<double> human;
  EvalResult result;
  for (const auto& p : ds.pairs) {
    const auto a = lookup_word(unit, p.word1);
    const auto b = lookup_word(unit, p.word2);
    if (!a || !b) {
      ++result.skipped_oov;
      continue;
    }
    // Normalized rows: the dot product is the cosine (zero rows score 0).
    const auto x = unit.row(*a);
    const auto y = unit.row(*b);
    double dot = 0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += static_cast<double>(x[i]) * y[i];
    pred.push_back(dot);
    human.push_back(p.score);
    ++result.evaluated;
  }
  if (result.evaluated < 2) {
    throw UndefinedMetricError("dataset '" + ds.name + "': only " + std::to_string(result.evaluated) +
                               " pair(s) in vocabulary, " + std::to_string(result.skipped_oov) +
                               " skipped; need at least 2");
  }
  result.score = spearman(pred, human);
  return result;
}

AnalogyScores eval_analogy_both(const WordVectors& vecs, const AnalogyDataset& ds,
                                const AnalogyOptions& options) {
  const WordVectors unit = vecs.normalized() ? vecs : normalize_rows(vecs);
  const std::size_t limit =
      options.restrict_vocab == 0 ? unit.size() : std::min(options.restrict_vocab, unit.size());
  const std::size_t dim = unit.dim();

  struct Resolved {
    WordId a, a_star, b, b_star;
  };
  std::vector<Resolved> questions;
  AnalogyScores scores;
  for (const auto& q : ds.questions) {
    const auto a = lookup_word(unit, q.a);
    const auto as = lookup_word(unit, q.a_star);
    const auto b = lookup_word(unit, q.b);
    const auto bs = lookup_word(unit, q.b_star);
    const bool ok = a && as && b && bs && *a < limit && *as < limit && *b < limit && *bs < limit;
    if (!ok) {
      ++scores.add.skipped_oov;
      continue;
    }
    questions.push_back({*a, *as, *b, *bs});
  }
  scores.mul.skipped_oov = scores.add.skipped_oov;
  if (questions.empty()) {
    throw UndefinedMetricError("dataset '" + ds.name + "': no question has all four words in vocabulary");
  }

  const Eigen::Map<const RowMajor> candidates(unit.matrix().values().data(),
                                              static_cast<Eigen::Index>(limit),
                                              static_cast<Eigen::Index>(dim));
  const std::size_t batch = std::max<std::size_t>(1, options.batch);
  RowMajor query;
  Eigen::MatrixXf sims;
  std::size_t add_correct = 0;
  std::size_t mul_correct = 0;

  for (std::size_t start = 0; start < questions.size(); start += batch) {
    const std::size_t count = std::min(batch, questions.size() - start);
    query.resize(static_cast<Eigen::Index>(3 * count), static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < count; ++j) {
      const auto& q = questions[start + j];
      const WordId ids[3] = {q.a, q.a_star, q.b};
      for (std::size_t s = 0; s < 3; ++s) {
        const auto row = unit.row(ids[s]);
        for (std::size_t c = 0; c < dim; ++c) {
          query(static_cast<Eigen::Index>(3 * j + s), static_cast<Eigen::Index>(c)) = row[c];
        }
      }
    }
    sims.noalias() = candidates * query.transpose();

    for (std::size_t j = 0; j < count; ++j) {
      const auto& q = questions[start + j];
      const auto col = static_cast<Eigen::Index>(3 * j);
      double best_add = -std::numeric_limits<double>::infinity();
      double best_mul = -std::numeric_limits<double>::infinity();
      std::size_t arg_add = limit;
      std::size_t arg_mul = limit;
      for (std::size_t c = 0; c < limit; ++c) {
        if (c == q.a || c == q.a_star || c == q.b) continue;
        const auto r = static_cast<Eigen::Index>(c);
        const double sa = sims(r, col);
        const double sas = sims(r, col + 1);
        const double sb = sims(r, col + 2);
        const double add = sas - sa + sb;
        const double mul = ((sas + 1.0) / 2.0) * ((sb + 1.0) / 2.0) / ((sa + 1.0) / 2.0 + kCosMulEpsilon);
        if (add > best_add) {
          best_add = add;
          arg_add = c;
        }
        if (mul > best_mul) {
          best_mul = mul;
          arg_mul = c;
        }
      }
      if (arg_add == q.b_star) ++add_correct;
      if (arg_mul == q.b_star) ++mul_correct;
    }
  }

  scores.add.evaluated = scores.mul.evaluated = questions.size();
  scores.add.score = static_cast<double>(add_correct) / static_cast<double>(questions.size());
  scores.mul.score = static_cast<double>(mul_correct) / static_cast<double>(questions.size());
  return scores;
}

EvalResult eval_analogy(const WordVectors& vecs, const AnalogyDataset& ds, AnalogyMethod method,
                        const AnalogyOptions& options) {
  const auto both = eval_analogy_both(vecs, ds, options);
  return method == AnalogyMethod::add ? both.add : both.mul;
}

// ---------------------------------------------------------------------------

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<std::string> suggest_words(const WordVectors& vecs, std::string_view word, std::size_t n) {
  std::vector<std::pair<std::size_t, WordId>> scored;
  scored.reserve(vecs.size());
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    scored.emplace_back(edit_distance(word, vecs.words()[i]), static_cast<WordId>(i));
  }
  const std::size_t keep = std::min(n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < keep; ++i) out.push_back(vecs.words()[scored[i].second]);
  return out;
}

NeighborLists neighbors(const WordVectors& vecs, std::string_view word, std::size_t n) {
  const auto target = lookup_word(vecs, word);
  if (!target) {
    std::string msg = "word '" + std::string(word) + "' is not in the vocabulary";
    const auto near = suggest_words(vecs, word);
    if (!near.empty()) {
      msg += "; closest spellings:";
      for (const auto& s : near) msg += " " + s;
    }
    throw Error(msg);
  }
  if (n == 0 || n >= vecs.size()) {
    throw std::invalid_argument("neighbor count must be between 1 and vocabulary size - 1");
  }

  const auto t = vecs.row(*target);
  std::vector<std::pair<double, WordId>> scored;
  scored.reserve(vecs.size() - 1);
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    if (i == *target) continue;
    const auto r = vecs.row(static_cast<WordId>(i));
    double dot = 0;
    for (std::size_t c = 0; c < t.size(); ++c) dot += static_cast<double>(t[c]) * r[c];
    scored.emplace_back(dot, static_cast<WordId>(i));
  }

  auto collect = [&](auto cmp) {
    std::vector<std::pair<double, WordId>> copy = scored;
    std::partial_sort(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(n), copy.end(), cmp);
    std::vector<Neighbor> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({copy[i].second, vecs.word(copy[i].second), copy[i].first});
    return out;
  };
  NeighborLists lists;
  lists.closest = collect([](const auto& x, const auto& y) {
    return x.first != y.first ? x.first > y.first : x.second < y.second;
  });
  lists.furthest = collect([](const auto& x, const auto& y) {
    return x.first != y.first ? x.first < y.first : x.second < y.second;
  });
  return lists;
}

std::string format_result_tsv(const std::string& dataset, const EvalResult& result) {
  std::ostringstream out;
  out.precision(6);
  out << dataset << '\t' << std::fixed << result.score << '\t' << result.evaluated << '\t'
      << result.skipped_oov;
  return out.str();
}

}  // namespace w2bq
