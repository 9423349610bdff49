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
#include <w2bq/matrix.hpp>
#include <w2bq/quantize.hpp>
#include <w2bq/trainer.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace w2bq {

/// Final word vectors: one row per word, optionally quantized or unit-normalized.
class WordVectors {
public:
  WordVectors() = default;
  WordVectors(std::vector<std::string> words, Matrix<float> matrix, BitLevel bitlevel,
              bool normalized = false);

  std::size_t size() const noexcept { return words_.size(); }
  std::size_t dim() const noexcept { return matrix_.cols(); }
  BitLevel bitlevel() const noexcept { return bitlevel_; }
  bool normalized() const noexcept { return normalized_; }

  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::string& word(WordId id) const { return words_.at(id); }
  const Matrix<float>& matrix() const noexcept { return matrix_; }
  std::span<const float> row(WordId id) const { return matrix_.row(id); }

  std::optional<WordId> find(std::string_view word) const;

  friend bool operator==(const WordVectors& a, const WordVectors& b) {
    return a.words_ == b.words_ && a.matrix_ == b.matrix_ && a.bitlevel_ == b.bitlevel_ &&
           a.normalized_ == b.normalized_;
  }

private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId, StringHash, std::equal_to<>> index_;
  Matrix<float> matrix_;
  BitLevel bitlevel_ = BitLevel::full;
  bool normalized_ = false;
};

/// Row i = Q(center_i + context_i); the plain sum when the scheme is full precision.
WordVectors finalize(const Vocabulary& vocab, const EmbeddingPair& emb,
                     const QuantizationScheme& scheme);

/// Applies Q1 to trained full-precision vectors (the T1 baseline).
WordVectors threshold_t1(const WordVectors& full);

/// Scales every nonzero row to unit L2 norm. Quantized inputs become full precision.
WordVectors normalize_rows(const WordVectors& vecs);

// Text format: "V d" header, then `word v_1 ... v_d` per line (9 significant digits).
void save_text(const WordVectors& vecs, std::ostream& out);
void save_text(const WordVectors& vecs, const std::filesystem::path& path);
/// When `bitlevel` is unset the lowest bit level whose codebook contains every
/// value is inferred (32 if none does).
WordVectors load_text(std::istream& in, std::optional<BitLevel> bitlevel = std::nullopt);
WordVectors load_text(const std::filesystem::path& path,
                      std::optional<BitLevel> bitlevel = std::nullopt);

// Packed format, little-endian:
//   "W2BQ" | version u8 = 1 | bitlevel u8 | dim u32 | vocab size u64 |
//   per word: u16 byte length + UTF-8 bytes | pack_rows payload
inline constexpr char kPackedMagic[4] = {'W', '2', 'B', 'Q'};
inline constexpr std::uint8_t kPackedVersion = 1;
inline constexpr std::size_t kPackedHeaderBytes = 18;

void save_packed(const WordVectors& vecs, std::ostream& out);
void save_packed(const WordVectors& vecs, const std::filesystem::path& path);
WordVectors load_packed(std::istream& in);
WordVectors load_packed(const std::filesystem::path& path);

/// Exact size of a packed file for the given words and shape.
std::uint64_t packed_file_size(const std::vector<std::string>& words, std::size_t dim,
                               BitLevel bitlevel);

/// Loads either format, choosing by the leading magic bytes.
WordVectors load_vectors(const std::filesystem::path& path);

}  // namespace w2bq
