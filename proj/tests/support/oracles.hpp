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

// Independent reference computations used only by tests. Nothing here calls
// into the code paths it is used to check.

#include <w2bq/corpus.hpp>
#include <w2bq/quantize.hpp>
#include <w2bq/trainer.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace w2bq::oracle {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double log_sigmoid(double x) { return -std::log1p(std::exp(-x)); }

inline double quantize_ref(double x, int bits) {
  if (bits == 1) return x >= 0 ? 1.0 / 3.0 : -1.0 / 3.0;
  if (bits == 2) {
    if (x > 0.5) return 0.75;
    if (x >= 0) return 0.25;
    if (x >= -0.5) return -0.25;
    return -0.75;
  }
  return x;
}

/// Objective as a function of free quantized variables: the center vector,
/// the negative vectors and each (already quantized) context vector.
inline double loss_of(const Vec& center, const std::vector<Vec>& negatives,
                      const std::vector<Vec>& context, bool average) {
  Vec hidden(center.size(), 0.0);
  for (const auto& v : context) {
    for (std::size_t c = 0; c < hidden.size(); ++c) hidden[c] += v[c];
  }
  if (average) {
    for (auto& h : hidden) h /= static_cast<double>(context.size());
  }
  double loss = -log_sigmoid(dot(center, hidden));
  for (const auto& u : negatives) {
    Vec neg(u.size());
    for (std::size_t c = 0; c < u.size(); ++c) neg[c] = -u[c];
    loss -= log_sigmoid(dot(neg, hidden));
  }
  return loss;
}

/// Central finite difference of `f` with respect to `x[i]`.
template <typename F>
double central_difference(F&& f, Vec& x, std::size_t i, double h = 1e-6) {
  const double saved = x[i];
  x[i] = saved + h;
  const double up = f();
  x[i] = saved - h;
  const double down = f();
  x[i] = saved;
  return (up - down) / (2 * h);
}

/// Step-by-step CBOW negative sampling on explicit row copies:
///   1. center vector u_o;  2. v_hat = mean of context rows;  3. negatives drawn
///   by the caller;  4. loss;  5-7. update u_o, each u_i and each v_j with their
///   gradients, all evaluated at the pre-update parameters.
/// Quantization (bits 1/2) is applied to every row before use; gradients go
/// straight through to the full-precision rows.
struct DirectResult {
  double loss = 0;
  BasicEmbeddingPair<double> after;
};

inline DirectResult direct_cbow(const BasicEmbeddingPair<double>& before, WordId center,
                                const std::vector<WordId>& context,
                                const std::vector<WordId>& negatives, double lr, int bits,
                                bool average = true) {
  const std::size_t d = before.dim();
  auto q_center = [&](WordId w) {
    Vec r(d);
    for (std::size_t c = 0; c < d; ++c) r[c] = quantize_ref(before.center(w, c), bits);
    return r;
  };
  auto q_context = [&](WordId w) {
    Vec r(d);
    for (std::size_t c = 0; c < d; ++c) r[c] = quantize_ref(before.context(w, c), bits);
    return r;
  };

  const Vec u_o = q_center(center);
  Vec v_hat(d, 0.0);
  for (WordId w : context) {
    const Vec v = q_context(w);
    for (std::size_t c = 0; c < d; ++c) v_hat[c] += v[c];
  }
  if (average) {
    for (auto& x : v_hat) x /= static_cast<double>(context.size());
  }

  DirectResult out{0.0, before};
  const double s_o = 1.0 / (1.0 + std::exp(-dot(u_o, v_hat)));
  out.loss = -std::log(s_o);
  Vec d_vhat(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) d_vhat[c] += (s_o - 1.0) * u_o[c];

  std::vector<double> s_neg;
  for (WordId w : negatives) {
    const Vec u_i = q_center(w);
    const double s = 1.0 / (1.0 + std::exp(dot(u_i, v_hat)));  // sigma(-u_i . v_hat)
    out.loss -= std::log(s);
    s_neg.push_back(1.0 - s);  // sigma(u_i . v_hat)
    for (std::size_t c = 0; c < d; ++c) d_vhat[c] += (1.0 - s) * u_i[c];
  }

  for (std::size_t c = 0; c < d; ++c) out.after.center(center, c) -= lr * (s_o - 1.0) * v_hat[c];
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    for (std::size_t c = 0; c < d; ++c) out.after.center(negatives[i], c) -= lr * s_neg[i] * v_hat[c];
  }
  for (WordId w : context) {
    for (std::size_t c = 0; c < d; ++c) out.after.context(w, c) -= lr * d_vhat[c];
  }
  return out;
}

/// Spearman via 1 - 6 sum d^2 / (n (n^2 - 1)); valid only without ties.
inline double spearman_rank_formula(const Vec& x, const Vec& y) {
  const std::size_t n = x.size();
  auto rank = [&](const Vec& v, std::size_t i) {
    double r = 1;
    for (std::size_t j = 0; j < n; ++j) r += v[j] < v[i] ? 1 : 0;
    return r;
  };
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = rank(x, i) - rank(y, i);
    sum += diff * diff;
  }
  const double nn = static_cast<double>(n);
  return 1.0 - 6.0 * sum / (nn * (nn * nn - 1.0));
}

/// Spearman with ties: average rank = #smaller + (#equal + 1) / 2, then Pearson.
inline double spearman_average_rank(const Vec& x, const Vec& y) {
  const std::size_t n = x.size();
  auto ranks = [&](const Vec& v) {
    Vec r(n);
    for (std::size_t i = 0; i < n; ++i) {
      double less = 0, equal = 0;
      for (std::size_t j = 0; j < n; ++j) {
        less += v[j] < v[i] ? 1 : 0;
        equal += v[j] == v[i] ? 1 : 0;
      }
      r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
  };
  const Vec rx = ranks(x), ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double cos_ref(const std::vector<float>& a, const std::vector<float>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += double(a[i]) * b[i];
    aa += double(a[i]) * a[i];
    bb += double(b[i]) * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

/// Exhaustive 3CosAdd / 3CosMul answer over explicit vectors; ties to lowest index.
inline std::size_t analogy_answer(const std::vector<std::vector<float>>& vecs, std::size_t a,
                                  std::size_t a_star, std::size_t b, bool mul) {
  std::size_t best = vecs.size();
  double best_score = -1e300;
  for (std::size_t c = 0; c < vecs.size(); ++c) {
    if (c == a || c == a_star || c == b) continue;
    const double ca = cos_ref(vecs[c], vecs[a]);
    const double cas = cos_ref(vecs[c], vecs[a_star]);
    const double cb = cos_ref(vecs[c], vecs[b]);
    const double score = mul ? ((cas + 1) / 2) * ((cb + 1) / 2) / ((ca + 1) / 2 + 0.001) : cas - ca + cb;
    if (score > best_score) {
      best_score = score;
      best = c;
    }
  }
  return best;
}

/// Letters-only name for an index (the tokenizer drops digits).
inline std::string alpha_name(std::size_t i, const std::string& prefix) {
  std::string s;
  do {
    s.insert(s.begin(), static_cast<char>('a' + i % 26));
    i /= 26;
  } while (i > 0);
  return prefix + s;
}

/// Seeded synthetic corpus with topical structure: each line draws a topic and
/// mixes Zipf-distributed function words with Zipf-distributed topic words.
inline void write_topic_corpus(const std::filesystem::path& path, std::size_t tokens,
                               std::uint64_t seed = 7, std::size_t topics = 40,
                               std::size_t words_per_topic = 60, std::size_t function_words = 80) {
  std::mt19937_64 rng(seed);
  auto zipf = [](std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / static_cast<double>(i + 1);
    return std::discrete_distribution<std::size_t>(w.begin(), w.end());
  };
  auto fn = zipf(function_words);
  auto tw = zipf(words_per_topic);
  std::uniform_int_distribution<std::size_t> topic(0, topics - 1);
  std::uniform_int_distribution<int> length(8, 24);
  std::bernoulli_distribution is_function(0.35);

  std::ofstream out(path, std::ios::binary);
  std::size_t written = 0;
  while (written < tokens) {
    const std::size_t t = topic(rng);
    const int len = length(rng);
    for (int i = 0; i < len && written < tokens; ++i, ++written) {
      if (i > 0) out << ' ';
      if (is_function(rng)) {
        out << alpha_name(fn(rng), "f");
      } else {
        out << alpha_name(t * words_per_topic + tw(rng), "w");
      }
    }
    out << '\n';
  }
}

}  // namespace w2bq::oracle
