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

#include <w2bq/sampler.hpp>

#include <cmath>
#include <stdexcept>

namespace w2bq {

UnigramTable::UnigramTable(const Vocabulary& vocab, double alpha) : alpha_(alpha) {
  if (vocab.empty()) throw std::invalid_argument("unigram table needs a non-empty vocabulary");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("smoothing exponent must be finite and non-negative");
  }
  const std::size_t n = vocab.size();
  mass_.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mass_[i] = std::pow(static_cast<double>(vocab.counts()[i]), alpha);
    total += mass_[i];
  }
  for (auto& m : mass_) m /= total;

  // Vose's construction.
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<std::size_t> small;
  std::vector<std::size_t> large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = mass_[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = static_cast<WordId>(l);
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (std::size_t i : large) prob_[i] = 1.0;
  for (std::size_t i : small) prob_[i] = 1.0;  // rounding leftovers
}

void draw_negatives(const UnigramTable& table, WordId exclude, Rng& rng, std::span<WordId> out) {
  for (auto& slot : out) {
    WordId w = table.draw(rng);
    for (int retry = 0; w == exclude && retry < kExcludeRetries; ++retry) w = table.draw(rng);
    slot = w;
  }
}

std::vector<WordId> draw_negatives(const UnigramTable& table, std::size_t k, WordId exclude,
                                   Rng& rng) {
  if (k == 0) throw std::invalid_argument("at least one negative sample is required");
  std::vector<WordId> out(k);
  draw_negatives(table, exclude, rng, out);
  return out;
}

}  // namespace w2bq
