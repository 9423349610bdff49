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

#include <w2bq/corpus.hpp>
#include <w2bq/error.hpp>
#include <w2bq/matrix.hpp>
#include <w2bq/quantize.hpp>
#include <w2bq/random.hpp>
#include <w2bq/sampler.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <sstream>
#include <vector>

namespace w2bq {

// ---------------------------------------------------------------------------
// Parameters

/// Full-precision center (u) and context (v) vectors, one row per word.
template <std::floating_point Real>
struct BasicEmbeddingPair {
  BasicEmbeddingPair() = default;
  BasicEmbeddingPair(std::size_t vocab_size, std::size_t dim)
      : center(vocab_size, dim), context(vocab_size, dim) {}

  std::size_t size() const noexcept { return center.rows(); }
  std::size_t dim() const noexcept { return center.cols(); }

  Matrix<Real> center;
  Matrix<Real> context;

  friend bool operator==(const BasicEmbeddingPair&, const BasicEmbeddingPair&) = default;
};

using EmbeddingPair = BasicEmbeddingPair<float>;

/// Center entries ~ U(-0.5/d, 0.5/d), context entries zero.
EmbeddingPair init_embeddings(std::size_t vocab_size, std::size_t dim, Rng& rng);

// ---------------------------------------------------------------------------
// The CBOW negative-sampling step

struct CbowOptions {
  BitLevel bitlevel = BitLevel::full;
  /// Divide the summed context by |context|. Off reproduces the plain-sum
  /// quantized objective.
  bool average_context = true;
};

/// Numerically stable log(1 + exp(x)).
template <std::floating_point Real>
Real softplus(Real x) noexcept {
  return x > Real(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <std::floating_point Real>
Real sigmoid(Real x) noexcept {
  if (x >= Real(0)) return Real(1) / (Real(1) + std::exp(-x));
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

/// Unsynchronized element access for single-threaded use.
struct PlainAccess {
  template <typename Real>
  static Real load(const Real& x) noexcept { return x; }
  template <typename Real>
  static void store(Real& x, Real value) noexcept { x = value; }
};

/// Relaxed atomic element access. Concurrent workers may lose each other's
/// updates but never tear a value.
struct RelaxedAccess {
  template <typename Real>
  static Real load(const Real& x) noexcept {
    return std::atomic_ref<Real>(const_cast<Real&>(x)).load(std::memory_order_relaxed);
  }
  template <typename Real>
  static void store(Real& x, Real value) noexcept {
    std::atomic_ref<Real>(x).store(value, std::memory_order_relaxed);
  }
};

/// Scratch buffers reused across steps.
template <std::floating_point Real>
struct CbowScratch {
  std::vector<Real> hidden;
  std::vector<Real> hidden_grad;
  std::vector<Real> coeff;
};

/// One SGD step on a window. Gradients are taken w.r.t. the quantized
/// quantities at the pre-update point and applied unchanged to the full
/// precision rows (straight-through). The same hidden gradient is applied to
/// every context row. Returns the pre-update loss; throws NonFiniteError on a
/// non-finite score.
template <typename Access = PlainAccess, std::floating_point Real>
Real cbow_update(BasicEmbeddingPair<Real>& emb, WordId center, std::span<const WordId> context,
                 std::span<const WordId> negatives, Real lr, const CbowOptions& options,
                 CbowScratch<Real>& scratch, Real* max_abs = nullptr) {
  const std::size_t d = emb.dim();
  const BitLevel level = options.bitlevel;
  auto& hidden = scratch.hidden;
  auto& hidden_grad = scratch.hidden_grad;
  auto& coeff = scratch.coeff;
  hidden.assign(d, Real(0));
  hidden_grad.assign(d, Real(0));
  coeff.resize(negatives.size() + 1);

  for (WordId w : context) {
    const auto row = emb.context.row(w);
    for (std::size_t c = 0; c < d; ++c) hidden[c] += quantize_unchecked(Access::load(row[c]), level);
  }
  if (options.average_context) {
    const Real inv = Real(1) / static_cast<Real>(context.size());
    for (auto& h : hidden) h *= inv;
  }

  // Pass 1: scores and the hidden-layer gradient, all at the pre-update point.
  Real loss = 0;
  for (std::size_t t = 0; t <= negatives.size(); ++t) {
    const WordId target = t == 0 ? center : negatives[t - 1];
    const auto row = emb.center.row(target);
    Real score = 0;
    for (std::size_t c = 0; c < d; ++c) score += quantize_unchecked(Access::load(row[c]), level) * hidden[c];
    if (!std::isfinite(score)) {
      std::ostringstream msg;
      msg << "non-finite score " << score << " for target word " << target << " (center " << center
          << "); parameters diverged";
      throw NonFiniteError(msg.str());
    }
    const Real label = t == 0 ? Real(1) : Real(0);
    loss += t == 0 ? softplus(-score) : softplus(score);
    const Real g = sigmoid(score) - label;
    coeff[t] = g;
    for (std::size_t c = 0; c < d; ++c) hidden_grad[c] += g * quantize_unchecked(Access::load(row[c]), level);
  }

  // Pass 2: updates.
  Real peak = 0;
  for (std::size_t t = 0; t <= negatives.size(); ++t) {
    const WordId target = t == 0 ? center : negatives[t - 1];
    auto row = emb.center.row(target);
    const Real step = lr * coeff[t];
    for (std::size_t c = 0; c < d; ++c) {
      const Real next = Access::load(row[c]) - step * hidden[c];
      Access::store(row[c], next);
      if (max_abs) peak = std::max(peak, std::abs(next));
    }
  }
  for (WordId w : context) {
    auto row = emb.context.row(w);
    for (std::size_t c = 0; c < d; ++c) {
      const Real next = Access::load(row[c]) - lr * hidden_grad[c];
      Access::store(row[c], next);
      if (max_abs) peak = std::max(peak, std::abs(next));
    }
  }
  if (max_abs) *max_abs = std::max(*max_abs, peak);
  return loss;
}

/// Single-threaded convenience wrapper around cbow_update.
template <std::floating_point Real>
Real cbow_step(BasicEmbeddingPair<Real>& emb, const TrainingWindow& window,
               std::span<const WordId> negatives, Real lr, const CbowOptions& options) {
  if (window.context.empty()) throw std::invalid_argument("window context is empty");
  if (!(lr > Real(0))) throw std::invalid_argument("learning rate must be positive");
  CbowScratch<Real> scratch;
  return cbow_update<PlainAccess>(emb, window.center, window.context, negatives, lr, options,
                                  scratch);
}

/// Loss and exact gradients of the (quantized) objective with respect to the
/// quantized quantities Q(u_o), Q(u_i) and Q(v_j). No parameters change.
template <std::floating_point Real>
struct CbowGradients {
  Real loss = 0;
  std::vector<Real> center;                 // dJ/dQ(u_o)
  std::vector<std::vector<Real>> negatives;  // dJ/dQ(u_i), one per draw
  std::vector<Real> hidden;                 // dJ/d(v_hat)
  std::vector<Real> context;                // dJ/dQ(v_j), identical for every j
};

template <std::floating_point Real>
CbowGradients<Real> cbow_gradients(const BasicEmbeddingPair<Real>& emb, const TrainingWindow& window,
                                   std::span<const WordId> negatives, const CbowOptions& options) {
  const std::size_t d = emb.dim();
  const BitLevel level = options.bitlevel;
  std::vector<Real> hidden(d, Real(0));
  for (WordId w : window.context) {
    for (std::size_t c = 0; c < d; ++c) hidden[c] += quantize_unchecked(emb.context(w, c), level);
  }
  if (options.average_context) {
    for (auto& h : hidden) h /= static_cast<Real>(window.context.size());
  }

  CbowGradients<Real> out;
  out.hidden.assign(d, Real(0));
  for (std::size_t t = 0; t <= negatives.size(); ++t) {
    const WordId target = t == 0 ? window.center : negatives[t - 1];
    Real score = 0;
    for (std::size_t c = 0; c < d; ++c) score += quantize_unchecked(emb.center(target, c), level) * hidden[c];
    out.loss += t == 0 ? softplus(-score) : softplus(score);
    const Real g = sigmoid(score) - (t == 0 ? Real(1) : Real(0));
    std::vector<Real> grad(d);
    for (std::size_t c = 0; c < d; ++c) {
      grad[c] = g * hidden[c];
      out.hidden[c] += g * quantize_unchecked(emb.center(target, c), level);
    }
    if (t == 0) {
      out.center = std::move(grad);
    } else {
      out.negatives.push_back(std::move(grad));
    }
  }
  out.context = out.hidden;
  if (options.average_context) {
    for (auto& g : out.context) g /= static_cast<Real>(window.context.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

struct TrainingConfig {
  std::size_t dim = 800;
  int window = 10;
  int negatives = 12;
  int epochs = 25;
  double lr_start = 0.05;
  double lr_end = 0.0001;
  double sample = 1e-4;
  std::uint64_t min_count = 5;
  BitLevel bitlevel = BitLevel::one;
  double alpha = 0.75;
  std::size_t workers = 1;
  std::uint64_t seed = 1;
  bool dynamic_window = true;
  bool average_context = true;
  bool track_max_abs = false;

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;

  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

/// Linear decay from lr_start to lr_end over progress in [0, 1], floored at lr_end.
double learning_rate_at(double progress, double lr_start, double lr_end);

inline constexpr std::size_t kReportIntervals = 100;
/// Words a worker processes between learning-rate refreshes.
inline constexpr std::uint64_t kLearningRateRefreshWords = 10000;

/// Snapshot emitted at each 1% reporting boundary.
struct ProgressEvent {
  std::size_t interval = 0;  // 0..99
  double mean_loss = 0;      // this worker's mean loss over the interval
  double learning_rate = 0;
  std::uint64_t words = 0;
  double max_abs = 0;        // only when tracking is enabled
};

struct TrainingReport {
  /// Sum of losses and update counts for each 1%-of-training interval.
  std::vector<double> interval_loss_sum = std::vector<double>(kReportIntervals, 0.0);
  std::vector<std::uint64_t> interval_updates = std::vector<std::uint64_t>(kReportIntervals, 0);
  /// Learning rate in effect when each interval was first entered.
  std::vector<double> learning_rate = std::vector<double>(kReportIntervals, 0.0);
  std::uint64_t words_processed = 0;
  std::uint64_t updates = 0;
  double seconds = 0;
  double max_abs = 0;

  /// Mean loss of interval `i`, NaN if it saw no updates.
  double interval_mean(std::size_t i) const;
  /// Mean loss over intervals [first, last).
  double mean_loss(std::size_t first, std::size_t last) const;
  /// Mean loss over the last non-empty interval.
  double end_loss() const;
};

struct TrainingResult {
  EmbeddingPair embeddings;
  TrainingReport report;
};

using ProgressCallback = std::function<void(const ProgressEvent&)>;

/// Trains on a text file with a prebuilt vocabulary. Workers stream disjoint
/// byte shards and update the shared matrices without locks; results are
/// reproducible only with one worker.
TrainingResult train(const std::filesystem::path& corpus, const Vocabulary& vocab,
                     const TrainingConfig& config, const ProgressCallback& progress = {});

/// Builds the vocabulary (min_count filtered) and trains.
TrainingResult train(const std::filesystem::path& corpus, const TrainingConfig& config,
                     const ProgressCallback& progress = {});

}  // namespace w2bq
