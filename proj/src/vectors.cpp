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

#include <w2bq/vectors.hpp>

#include <w2bq/error.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace w2bq {

namespace {

void ensure_finite(const Matrix<float>& m, const char* what) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (!std::isfinite(m(r, c))) {
        std::ostringstream msg;
        msg << what << " has non-finite value " << m(r, c) << " at row " << r << ", column " << c;
        throw NonFiniteError(msg.str());
      }
    }
  }
}

bool all_in_codebook(const Matrix<float>& m, const QuantizationScheme& scheme) {
  for (float x : m.values()) {
    if (scheme.code_of(x) < 0) return false;
  }
  return true;
}

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in, const char* field) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw FormatError(std::string("packed vectors truncated while reading ") + field);
  }
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return static_cast<T>(v);
}

void check_word_for_text(const std::string& word) {
  if (word.empty()) throw FormatError("cannot write an empty word to the text format");
  for (char c : word) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
      throw FormatError("word '" + word + "' contains whitespace; not representable in text format");
    }
  }
}

[[noreturn]] void text_error(std::size_t line, const std::string& what) {
  throw FormatError("text vectors line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if constexpr (std::is_floating_point_v<T>) {
    // strtof handles inf/nan spellings and is locale-independent enough for "C".
    std::string tmp(s);
    char* end = nullptr;
    out = std::strtof(tmp.c_str(), &end);
    return end == tmp.c_str() + tmp.size() && !tmp.empty();
  } else {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
  }
}

}  // namespace

WordVectors::WordVectors(std::vector<std::string> words, Matrix<float> matrix, BitLevel bitlevel,
                         bool normalized)
    : words_(std::move(words)), matrix_(std::move(matrix)), bitlevel_(bitlevel), normalized_(normalized) {
  if (words_.size() != matrix_.rows()) throw std::invalid_argument("word count does not match matrix rows");
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<WordId>(i)).second) {
      throw FormatError("duplicate word '" + words_[i] + "'");
    }
  }
  if (is_quantized(bitlevel_) && !all_in_codebook(matrix_, QuantizationScheme(bitlevel_))) {
    throw FormatError("vectors declared " + std::to_string(bits_of(bitlevel_)) +
                      "-bit contain values outside the codebook");
  }
}

std::optional<WordId> WordVectors::find(std::string_view word) const {
  const auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

WordVectors finalize(const Vocabulary& vocab, const EmbeddingPair& emb, const QuantizationScheme& scheme) {
  if (emb.size() != vocab.size()) throw std::invalid_argument("embedding rows do not match vocabulary");
  ensure_finite(emb.center, "center matrix");
  ensure_finite(emb.context, "context matrix");
  Matrix<float> out(emb.size(), emb.dim());
  auto dst = out.values();
  const auto u = emb.center.values();
  const auto v = emb.context.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = scheme(u[i] + v[i]);
  return WordVectors(vocab.words(), std::move(out), scheme.level());
}

WordVectors threshold_t1(const WordVectors& full) {
  if (full.bitlevel() != BitLevel::full) {
    throw std::invalid_argument("T1 thresholding expects full-precision vectors");
  }
  const QuantizationScheme q1_scheme(BitLevel::one);
  Matrix<float> out = full.matrix();
  for (auto& x : out.values()) x = q1_scheme(x);
  return WordVectors(full.words(), std::move(out), BitLevel::one);
}

WordVectors normalize_rows(const WordVectors& vecs) {
  Matrix<float> out = vecs.matrix();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    double sq = 0;
    for (float x : row) sq += static_cast<double>(x) * x;
    if (sq == 0.0) continue;
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& x : row) x = static_cast<float>(x * inv);
  }
  return WordVectors(vecs.words(), std::move(out), BitLevel::full, true);
}

// ---------------------------------------------------------------------------

void save_text(const WordVectors& vecs, std::ostream& out) {
  for (const auto& w : vecs.words()) check_word_for_text(w);
  out << vecs.size() << ' ' << vecs.dim() << '\n';
  char buf[32];
  for (std::size_t r = 0; r < vecs.size(); ++r) {
    out << vecs.words()[r];
    for (float x : vecs.row(static_cast<WordId>(r))) {
      std::snprintf(buf, sizeof buf, " %.9g", static_cast<double>(x));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw Error("failed writing text vectors");
}

void save_text(const WordVectors& vecs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  save_text(vecs, out);
}

WordVectors load_text(std::istream& in, std::optional<BitLevel> bitlevel) {
  std::string line;
  if (!std::getline(in, line)) text_error(1, "missing 'V d' header");
  const auto header = split_ws(line);
  std::size_t rows = 0;
  std::size_t dim = 0;
  if (header.size() != 2 || !parse_number(header[0], rows) || !parse_number(header[1], dim) || dim == 0) {
    text_error(1, "expected header 'V d' with positive integers");
  }

  std::vector<std::string> words;
  words.reserve(rows);
  std::vector<float> values;
  values.reserve(rows * dim);
  std::size_t lineno = 1;
  while (words.size() < rows && std::getline(in, line)) {
    ++lineno;
    const auto fields = split_ws(line);
    if (fields.empty()) text_error(lineno, "empty line");
    if (fields.size() != dim + 1) {
      text_error(lineno, "expected a word and " + std::to_string(dim) + " values, found " +
                             std::to_string(fields.size()) + " fields");
    }
    words.emplace_back(fields[0]);
    for (std::size_t c = 1; c <= dim; ++c) {
      float x = 0;
      if (!parse_number(fields[c], x)) {
        text_error(lineno, "cannot parse value '" + std::string(fields[c]) + "'");
      }
      if (!std::isfinite(x)) text_error(lineno, "non-finite value");
      values.push_back(x);
    }
  }
  if (words.size() != rows) {
    text_error(lineno + 1, "expected " + std::to_string(rows) + " word lines, found " +
                               std::to_string(words.size()));
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!split_ws(line).empty()) text_error(lineno, "unexpected data after the last word");
  }

  Matrix<float> matrix(rows, dim, std::move(values));
  BitLevel level = BitLevel::full;
  if (bitlevel) {
    level = *bitlevel;
  } else if (all_in_codebook(matrix, QuantizationScheme(BitLevel::one))) {
    level = BitLevel::one;
  } else if (all_in_codebook(matrix, QuantizationScheme(BitLevel::two))) {
    level = BitLevel::two;
  }
  try {
    return WordVectors(std::move(words), std::move(matrix), level);
  } catch (const FormatError& e) {
    throw FormatError(std::string("text vectors: ") + e.what());
  }
}

WordVectors load_text(const std::filesystem::path& path, std::optional<BitLevel> bitlevel) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return load_text(in, bitlevel);
}

// ---------------------------------------------------------------------------

std::uint64_t packed_file_size(const std::vector<std::string>& words, std::size_t dim, BitLevel bitlevel) {
  std::uint64_t size = kPackedHeaderBytes;
  for (const auto& w : words) size += 2 + w.size();
  return size + words.size() * packed_row_bytes(dim, bitlevel);
}

void save_packed(const WordVectors& vecs, std::ostream& out) {
  if (!is_quantized(vecs.bitlevel())) {
    throw std::invalid_argument("packed format requires 1- or 2-bit vectors");
  }
  if (vecs.dim() > std::numeric_limits<std::uint32_t>::max()) throw FormatError("dimension too large");
  const QuantizationScheme scheme(vecs.bitlevel());
  const auto payload = pack_rows(vecs.matrix(), scheme);

  out.write(kPackedMagic, sizeof kPackedMagic);
  put_le<std::uint8_t>(out, kPackedVersion);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(scheme.bits()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(vecs.dim()));
  put_le<std::uint64_t>(out, vecs.size());
  for (const auto& w : vecs.words()) {
    if (w.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw FormatError("word longer than 65535 bytes cannot be stored");
    }
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(w.size()));
    out.write(w.data(), static_cast<std::streamsize>(w.size()));
  }
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!out) throw Error("failed writing packed vectors");
}

void save_packed(const WordVectors& vecs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  save_packed(vecs, out);
}

WordVectors load_packed(std::istream& in) {
  char magic[4] = {};
  in.read(magic, sizeof magic);
  if (in.gcount() != 4 || std::memcmp(magic, kPackedMagic, 4) != 0) {
    throw FormatError("not a packed vector file (bad magic; expected \"W2BQ\")");
  }
  const auto version = get_le<std::uint8_t>(in, "version");
  if (version != kPackedVersion) {
    throw FormatError("unsupported packed format version " + std::to_string(version));
  }
  const auto bits = get_le<std::uint8_t>(in, "bit level");
  if (bits != 1 && bits != 2) {
    throw FormatError("packed file declares unsupported bit level " + std::to_string(bits));
  }
  const auto dim = get_le<std::uint32_t>(in, "dimension");
  const auto rows = get_le<std::uint64_t>(in, "vocabulary size");
  if (dim == 0) throw FormatError("packed file declares dimension 0");

  std::vector<std::string> words;
  for (std::uint64_t i = 0; i < rows; ++i) {
    const auto len = get_le<std::uint16_t>(in, "word length");
    std::string w(len, '\0');
    in.read(w.data(), len);
    if (in.gcount() != len) throw FormatError("packed vectors truncated inside the vocabulary");
    words.push_back(std::move(w));
  }

  const QuantizationScheme scheme(bitlevel_from_int(bits));
  const std::size_t payload_bytes = rows * packed_row_bytes(dim, scheme.level());
  std::vector<std::uint8_t> payload(payload_bytes);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload_bytes));
  if (static_cast<std::size_t>(in.gcount()) != payload_bytes) {
    throw FormatError("packed vectors truncated: payload has " + std::to_string(in.gcount()) +
                      " of " + std::to_string(payload_bytes) + " bytes");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("packed vectors have trailing bytes after the payload");
  }
  return WordVectors(std::move(words), unpack_rows(payload, rows, dim, scheme), scheme.level());
}

WordVectors load_packed(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return load_packed(in);
}

WordVectors load_vectors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, sizeof magic);
  const bool packed = in.gcount() == 4 && std::memcmp(magic, kPackedMagic, 4) == 0;
  in.clear();
  in.seekg(0);
  return packed ? load_packed(in) : load_text(in);
}

}  // namespace w2bq
