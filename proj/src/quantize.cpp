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

#include <w2bq/quantize.hpp>

#include <array>
#include <sstream>
#include <stdexcept>

namespace w2bq {

namespace {

constexpr std::array<double, 2> kCodebook1 = {-1.0 / 3.0, 1.0 / 3.0};
constexpr std::array<double, 4> kCodebook2 = {-0.75, -0.25, 0.25, 0.75};

// Float codebooks are produced by the quantizers themselves so that a value
// written by training always matches its code exactly.
const std::array<float, 2> kCodebook1f = {q1_unchecked(-1.0f), q1_unchecked(1.0f)};
const std::array<float, 4> kCodebook2f = {q2_unchecked(-1.0f), q2_unchecked(-0.25f),
                                          q2_unchecked(0.25f), q2_unchecked(1.0f)};

template <typename Book, typename T>
int find_code(const Book& book, T value) {
  for (std::size_t i = 0; i < book.size(); ++i) {
    if (book[i] == value) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

namespace detail {
void throw_non_finite(double x) {
  std::ostringstream msg;
  msg << "cannot quantize non-finite value " << x;
  throw NonFiniteError(msg.str());
}
}  // namespace detail

BitLevel bitlevel_from_int(int bits) {
  switch (bits) {
    case 1: return BitLevel::one;
    case 2: return BitLevel::two;
    case 32: return BitLevel::full;
    default: break;
  }
  throw std::invalid_argument("unsupported bit level " + std::to_string(bits) +
                              " (expected 1, 2 or 32)");
}

std::span<const double> QuantizationScheme::codebook() const noexcept {
  switch (level_) {
    case BitLevel::one: return kCodebook1;
    case BitLevel::two: return kCodebook2;
    case BitLevel::full: break;
  }
  return {};
}

int QuantizationScheme::code_of(float value) const noexcept {
  switch (level_) {
    case BitLevel::one: return find_code(kCodebook1f, value);
    case BitLevel::two: return find_code(kCodebook2f, value);
    case BitLevel::full: break;
  }
  return -1;
}

int QuantizationScheme::code_of(double value) const noexcept {
  switch (level_) {
    case BitLevel::one: return find_code(kCodebook1, value);
    case BitLevel::two: return find_code(kCodebook2, value);
    case BitLevel::full: break;
  }
  return -1;
}

std::size_t packed_row_bytes(std::size_t dim, BitLevel level) {
  if (!is_quantized(level)) throw std::invalid_argument("packing requires a 1- or 2-bit scheme");
  return (dim * static_cast<std::size_t>(bits_of(level)) + 7) / 8;
}

std::vector<std::uint8_t> pack_rows(const Matrix<float>& values, const QuantizationScheme& scheme) {
  const std::size_t dim = values.cols();
  const std::size_t row_bytes = packed_row_bytes(dim, scheme.level());
  const std::size_t bits = static_cast<std::size_t>(scheme.bits());
  std::vector<std::uint8_t> out(values.rows() * row_bytes, 0);

  for (std::size_t r = 0; r < values.rows(); ++r) {
    std::uint8_t* dst = out.data() + r * row_bytes;
    const auto row = values.row(r);
    for (std::size_t c = 0; c < dim; ++c) {
      const int code = scheme.code_of(row[c]);
      if (code < 0) {
        std::ostringstream msg;
        msg << "value " << row[c] << " at row " << r << ", column " << c
            << " is not in the " << scheme.bits() << "-bit codebook";
        throw FormatError(msg.str());
      }
      const std::size_t bit = c * bits;
      dst[bit / 8] |= static_cast<std::uint8_t>(code << (bit % 8));
    }
  }
  return out;
}

Matrix<float> unpack_rows(std::span<const std::uint8_t> payload, std::size_t rows,
                          std::size_t dim, const QuantizationScheme& scheme) {
  const std::size_t row_bytes = packed_row_bytes(dim, scheme.level());
  if (payload.size() != rows * row_bytes) {
    std::ostringstream msg;
    msg << "packed payload has " << payload.size() << " bytes, expected " << rows * row_bytes
        << " (" << rows << " rows x " << row_bytes << " bytes)";
    throw FormatError(msg.str());
  }
  const std::size_t bits = static_cast<std::size_t>(scheme.bits());
  const unsigned mask = (1u << bits) - 1u;
  const auto book = scheme.codebook();

  Matrix<float> out(rows, dim);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::uint8_t* src = payload.data() + r * row_bytes;
    auto row = out.row(r);
    for (std::size_t c = 0; c < dim; ++c) {
      const std::size_t bit = c * bits;
      const unsigned code = (src[bit / 8] >> (bit % 8)) & mask;
      row[c] = quantize_unchecked(static_cast<float>(book[code]), scheme.level());
    }
  }
  return out;
}

}  // namespace w2bq
