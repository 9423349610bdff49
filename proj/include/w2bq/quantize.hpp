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

// Deterministic 1-bit and 2-bit quantizers, the straight-through gradient
// rule, and the bit-packed row codec used by the .w2bq file format.
//
// Codebooks (codes are indices, ascending):
//   1-bit: 0 -> -1/3, 1 -> +1/3
//   2-bit: 0 -> -3/4, 1 -> -1/4, 2 -> +1/4, 3 -> +3/4
//
// Packed rows take ceil(d * bits / 8) bytes. Parameters fill each byte from
// the least significant bit upward; trailing pad bits are zero.

#include <w2bq/error.hpp>
#include <w2bq/matrix.hpp>

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace w2bq {

enum class BitLevel : std::uint8_t { one = 1, two = 2, full = 32 };

/// Accepts 1, 2 or 32. Anything else throws std::invalid_argument.
BitLevel bitlevel_from_int(int bits);

inline int bits_of(BitLevel level) noexcept { return static_cast<int>(level); }

inline bool is_quantized(BitLevel level) noexcept { return level != BitLevel::full; }

/// Q1 without the finiteness check; used in the training inner loop.
template <std::floating_point Real>
constexpr Real q1_unchecked(Real x) noexcept {
  return x >= Real(0) ? Real(1) / Real(3) : Real(-1) / Real(3);
}

template <std::floating_point Real>
constexpr Real q2_unchecked(Real x) noexcept {
  // Written as two selects; the branchy form mispredicts on random signs.
  const Real mag = (x > Real(0.5) || x < Real(-0.5)) ? Real(0.75) : Real(0.25);
  return x >= Real(0) ? mag : -mag;
}

template <std::floating_point Real>
constexpr Real quantize_unchecked(Real x, BitLevel level) noexcept {
  switch (level) {
    case BitLevel::one: return q1_unchecked(x);
    case BitLevel::two: return q2_unchecked(x);
    case BitLevel::full: break;
  }
  return x;
}

namespace detail {
[[noreturn]] void throw_non_finite(double x);
}

template <std::floating_point Real>
Real q1(Real x) {
  if (!std::isfinite(x)) detail::throw_non_finite(static_cast<double>(x));
  return q1_unchecked(x);
}

template <std::floating_point Real>
Real q2(Real x) {
  if (!std::isfinite(x)) detail::throw_non_finite(static_cast<double>(x));
  return q2_unchecked(x);
}

/// A bit level together with its ordered codebook.
class QuantizationScheme {
public:
  explicit QuantizationScheme(BitLevel level = BitLevel::full) : level_(level) {}

  BitLevel level() const noexcept { return level_; }
  int bits() const noexcept { return bits_of(level_); }
  bool quantized() const noexcept { return is_quantized(level_); }

  /// Representable values in code order; empty for the identity scheme.
  std::span<const double> codebook() const noexcept;

  /// Code index of `value`, or -1 when it is not a codebook member. Float
  /// inputs compare against the float-rounded codebook.
  int code_of(float value) const noexcept;
  int code_of(double value) const noexcept;

  template <std::floating_point Real>
  Real operator()(Real x) const {
    if (!std::isfinite(x)) detail::throw_non_finite(static_cast<double>(x));
    return quantize_unchecked(x, level_);
  }

  friend bool operator==(const QuantizationScheme&, const QuantizationScheme&) = default;

private:
  BitLevel level_;
};

/// Elementwise quantization; identity for BitLevel::full.
template <std::floating_point Real>
std::vector<Real> quantize_vector(std::span<const Real> v, const QuantizationScheme& scheme) {
  std::vector<Real> out;
  out.reserve(v.size());
  for (Real x : v) out.push_back(scheme(x));
  return out;
}

/// Straight-through estimator: dQ/dx is taken as the identity, so the
/// upstream gradient passes through unchanged.
template <std::floating_point Real>
std::vector<Real> ste_gradient(std::span<const Real> upstream) {
  return {upstream.begin(), upstream.end()};
}

/// Bytes per packed row: ceil(d * bits / 8).
std::size_t packed_row_bytes(std::size_t dim, BitLevel level);

/// Packs a matrix whose entries are all codebook members. Throws FormatError
/// naming the first offending row/column otherwise.
std::vector<std::uint8_t> pack_rows(const Matrix<float>& values, const QuantizationScheme& scheme);

/// Inverse of pack_rows. `payload.size()` must equal rows * packed_row_bytes(dim).
Matrix<float> unpack_rows(std::span<const std::uint8_t> payload, std::size_t rows,
                          std::size_t dim, const QuantizationScheme& scheme);

}  // namespace w2bq
