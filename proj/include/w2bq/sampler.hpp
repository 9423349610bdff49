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
#include <w2bq/random.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace w2bq {

/// Smoothed unigram distribution p(i) = count_i^alpha / sum_j count_j^alpha,
/// sampled in O(1) with Walker's alias method.
class UnigramTable {
public:
  UnigramTable(const Vocabulary& vocab, double alpha);

  std::size_t size() const noexcept { return prob_.size(); }
  double alpha() const noexcept { return alpha_; }

  /// Exact analytic probability of word `id`.
  double probability(WordId id) const { return mass_.at(id); }

  WordId draw(Rng& rng) const {
    const auto slot = static_cast<std::size_t>(uniform_int(rng, 0, prob_.size() - 1));
    return uniform01(rng) < prob_[slot] ? static_cast<WordId>(slot) : alias_[slot];
  }

private:
  double alpha_;
  std::vector<double> mass_;
  std::vector<double> prob_;
  std::vector<WordId> alias_;
};

inline UnigramTable build_unigram_table(const Vocabulary& vocab, double alpha) {
  return UnigramTable(vocab, alpha);
}

/// Redraws per slot before a collision with the excluded word is accepted.
inline constexpr int kExcludeRetries = 8;

/// Fills `out` with independent draws, redrawing any that hit `exclude` up to
/// kExcludeRetries times.
void draw_negatives(const UnigramTable& table, WordId exclude, Rng& rng, std::span<WordId> out);

std::vector<WordId> draw_negatives(const UnigramTable& table, std::size_t k, WordId exclude,
                                   Rng& rng);

}  // namespace w2bq
