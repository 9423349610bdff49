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

#include <w2bq/corpus.hpp>

#include <w2bq/error.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace w2bq {

namespace {

constexpr std::size_t kReadChunk = 1 << 20;

constexpr bool ascii_letter(unsigned char b) noexcept {
  return (b >= 'A' && b <= 'Z') || (b >= 'a' && b <= 'z');
}

struct Range {
  char32_t lo;
  char32_t hi;
};

// Non-ASCII code points that separate words: Latin-1 punctuation, general
// punctuation and symbol blocks, CJK punctuation, fullwidth forms, emoji,
// private use, a handful of script-specific digits and stops, and U+FFFD.
constexpr std::array<Range, 27> kNonLetters = {{
    {0x0080, 0x00A9}, {0x00AB, 0x00B4}, {0x00B6, 0x00B9}, {0x00BB, 0x00BF},
    {0x00D7, 0x00D7}, {0x00F7, 0x00F7}, {0x037E, 0x037E}, {0x0387, 0x0387},
    {0x055A, 0x055F}, {0x0589, 0x058A}, {0x05BE, 0x05BE}, {0x060C, 0x060D},
    {0x061B, 0x061F}, {0x0660, 0x066D}, {0x06D4, 0x06D4}, {0x06F0, 0x06F9},
    {0x0964, 0x096F}, {0x2000, 0x2BFF}, {0x2E00, 0x2E7F}, {0x3000, 0x303F},
    {0xE000, 0xF8FF}, {0xFE00, 0xFE0F}, {0xFE30, 0xFE6F}, {0xFEFF, 0xFEFF},
    {0xFF00, 0xFF20}, {0xFF3B, 0xFF40}, {0xFF5B, 0xFF65},
}};

template <typename F>
void read_range(const std::filesystem::path& path, std::uint64_t begin, std::uint64_t end, F&& f) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file " + path.string());
  in.seekg(static_cast<std::streamoff>(begin));
  std::string buf(kReadChunk, '\0');
  std::uint64_t pos = begin;
  while (pos < end && in) {
    const auto want = static_cast<std::streamsize>(std::min<std::uint64_t>(kReadChunk, end - pos));
    in.read(buf.data(), want);
    const auto got = in.gcount();
    if (got <= 0) break;
    f(std::string_view(buf.data(), static_cast<std::size_t>(got)));
    pos += static_cast<std::uint64_t>(got);
  }
}

}  // namespace

bool is_alphabetic(char32_t cp) noexcept {
  if (cp < 0x80) return ascii_letter(static_cast<unsigned char>(cp));
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;
  if (cp >= 0xFFF0 && cp <= 0xFFFF) return false;
  for (const auto& r : kNonLetters) {
    if (cp < r.lo) break;
    if (cp <= r.hi) return false;
  }
  return cp <= 0x10FFFF;
}

// ---------------------------------------------------------------------------

Tokenizer::Tokenizer(WordSink on_word, NewlineSink on_newline)
    : on_word_(std::move(on_word)), on_newline_(std::move(on_newline)) {}

void Tokenizer::feed(std::string_view bytes) {
  for (char c : bytes) byte(static_cast<unsigned char>(c));
}

void Tokenizer::finish() {
  if (pending_need_ > 0) pending_need_ = 0;  // truncated sequence
  separator();
}

void Tokenizer::byte(unsigned char b) {
  if (pending_need_ > 0) {
    if ((b & 0xC0) == 0x80) {
      pending_[pending_len_++] = static_cast<char>(b);
      pending_cp_ = (pending_cp_ << 6) | (b & 0x3F);
      if (pending_len_ < pending_need_) return;
      const char32_t cp = pending_cp_;
      const int need = pending_need_;
      pending_need_ = 0;
      const bool overlong = (need == 3 && cp < 0x800) || (need == 4 && cp < 0x10000);
      const bool bad = overlong || (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF;
      if (bad) {
        separator();
      } else {
        code_point(cp, std::string_view(pending_, static_cast<std::size_t>(need)));
      }
      return;
    }
    // Sequence cut short: the partial sequence is a replacement character.
    pending_need_ = 0;
    separator();
  }

  if (b < 0x80) {
    if (ascii_letter(b)) {
      word_.push_back(static_cast<char>(b));
      return;
    }
    separator();
    if (b == '\n' && on_newline_) on_newline_();
    return;
  }

  int need = 0;
  char32_t init = 0;
  if (b >= 0xC2 && b <= 0xDF) {
    need = 2;
    init = b & 0x1F;
  } else if (b >= 0xE0 && b <= 0xEF) {
    need = 3;
    init = b & 0x0F;
  } else if (b >= 0xF0 && b <= 0xF4) {
    need = 4;
    init = b & 0x07;
  } else {
    separator();
    return;
  }
  pending_[0] = static_cast<char>(b);
  pending_len_ = 1;
  pending_need_ = need;
  pending_cp_ = init;
}

void Tokenizer::code_point(char32_t cp, std::string_view bytes) {
  if (is_alphabetic(cp)) {
    word_.append(bytes);
  } else {
    separator();
  }
}

void Tokenizer::separator() {
  if (word_.empty()) return;
  on_word_(word_);
  word_.clear();
}

std::vector<std::string> normalize_text(std::string_view raw) {
  std::vector<std::string> tokens;
  Tokenizer tok([&](std::string_view w) { tokens.emplace_back(w); });
  tok.feed(raw);
  tok.finish();
  return tokens;
}

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts)
    : words_(std::move(words)), counts_(std::move(counts)) {
  if (words_.size() != counts_.size()) throw std::invalid_argument("words/counts size mismatch");
  if (words_.size() > std::numeric_limits<WordId>::max()) throw Error("vocabulary too large");
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (counts_[i] == 0) throw FormatError("word '" + words_[i] + "' has a zero count");
    if (i > 0 && counts_[i] > counts_[i - 1]) {
      throw FormatError("vocabulary counts must be non-increasing (word '" + words_[i] + "')");
    }
    if (!index_.emplace(words_[i], static_cast<WordId>(i)).second) {
      throw FormatError("duplicate vocabulary word '" + words_[i] + "'");
    }
    total_ += counts_[i];
  }
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  const auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::save(std::ostream& out) const {
  for (std::size_t i = 0; i < words_.size(); ++i) out << words_[i] << '\t' << counts_[i] << '\n';
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw FormatError("vocabulary line " + std::to_string(lineno) + ": expected word<TAB>count");
    }
    std::uint64_t count = 0;
    try {
      std::size_t used = 0;
      count = std::stoull(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw FormatError("vocabulary line " + std::to_string(lineno) + ": bad count");
    }
    words.push_back(line.substr(0, tab));
    counts.push_back(count);
  }
  return Vocabulary(std::move(words), std::move(counts));
}

void VocabularyBuilder::add(std::string_view token) {
  auto it = counts_.find(token);
  if (it == counts_.end()) {
    counts_.emplace(std::string(token), Entry{1, seen_});
  } else {
    ++it->second.count;
  }
  ++seen_;
}

Vocabulary VocabularyBuilder::build(std::uint64_t min_count) const {
  if (min_count == 0) throw std::invalid_argument("min_count must be at least 1");
  std::vector<std::pair<const std::string*, Entry>> kept;
  for (const auto& [word, entry] : counts_) {
    if (entry.count >= min_count) kept.emplace_back(&word, entry);
  }
  if (kept.empty()) {
    throw EmptyVocabularyError("no token occurs at least " + std::to_string(min_count) +
                               " times; vocabulary is empty");
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    return a.second.first_seen < b.second.first_seen;
  });
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  words.reserve(kept.size());
  counts.reserve(kept.size());
  for (const auto& [word, entry] : kept) {
    words.push_back(*word);
    counts.push_back(entry.count);
  }
  return Vocabulary(std::move(words), std::move(counts));
}

Vocabulary build_vocab(std::span<const std::string> tokens, std::uint64_t min_count) {
  VocabularyBuilder builder;
  for (const auto& t : tokens) builder.add(t);
  return builder.build(min_count);
}

Vocabulary build_vocab_from_file(const std::filesystem::path& path, std::uint64_t min_count) {
  VocabularyBuilder builder;
  Tokenizer tok([&](std::string_view w) { builder.add(w); });
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw Error("cannot open corpus file " + path.string());
  read_range(path, 0, size, [&](std::string_view chunk) { tok.feed(chunk); });
  tok.finish();
  return builder.build(min_count);
}

// ---------------------------------------------------------------------------

double keep_probability(std::uint64_t word_count, std::uint64_t total_tokens, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("subsample threshold must be positive");
  if (word_count == 0 || total_tokens == 0) {
    throw std::invalid_argument("word and total counts must be positive");
  }
  const double freq = static_cast<double>(word_count) / static_cast<double>(total_tokens);
  if (freq <= threshold) return 1.0;
  return std::min(1.0, std::sqrt(threshold / freq));
}

WindowGenerator::WindowGenerator(const Vocabulary& vocab, WindowOptions options)
    : options_(options), keep_(vocab.size(), 1.0) {
  if (options_.window < 1) throw std::invalid_argument("window size must be at least 1");
  if (options_.sample > 0.0) {
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      keep_[i] = keep_probability(vocab.counts()[i], vocab.total_tokens(), options_.sample);
    }
  }
}

std::vector<TrainingWindow> iterate_windows(std::span<const std::string> tokens,
                                            const Vocabulary& vocab, const WindowOptions& options,
                                            Rng& rng) {
  std::vector<WordId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (auto id = vocab.find(t)) ids.push_back(*id);
  }
  WindowGenerator gen(vocab, options);
  std::vector<TrainingWindow> out;
  gen.for_each_window(ids, rng, [&](WordId center, std::span<const WordId> ctx) {
    out.push_back({center, {ctx.begin(), ctx.end()}});
  });
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::uint64_t> shard_boundaries(const std::filesystem::path& path, std::size_t shards) {
  if (shards == 0) throw std::invalid_argument("shard count must be positive");
  std::error_code ec;
  const std::uint64_t size = std::filesystem::file_size(path, ec);
  if (ec) throw Error("cannot open corpus file " + path.string());

  std::vector<std::uint64_t> bounds(shards + 1, 0);
  bounds[shards] = size;
  std::ifstream in(path, std::ios::binary);
  for (std::size_t i = 1; i < shards; ++i) {
    std::uint64_t pos = std::max(bounds[i - 1], size / shards * i);
    in.clear();
    in.seekg(static_cast<std::streamoff>(pos));
    char c = 0;
    while (pos < size && in.get(c)) {
      const auto b = static_cast<unsigned char>(c);
      if (b < 0x80 && !ascii_letter(b)) break;
      ++pos;
    }
    bounds[i] = std::min(pos, size);
  }
  return bounds;
}

SentenceReader::SentenceReader(const std::filesystem::path& path, const Vocabulary& vocab,
                               std::uint64_t begin, std::uint64_t end, std::size_t max_sentence)
    : path_(path), vocab_(vocab), begin_(begin), end_(end), max_sentence_(max_sentence) {
  if (max_sentence_ == 0) throw std::invalid_argument("max sentence length must be positive");
}

void SentenceReader::run(const std::function<void(std::span<const WordId>)>& on_sentence) {
  std::vector<WordId> sentence;
  sentence.reserve(max_sentence_);
  auto flush = [&] {
    if (!sentence.empty()) on_sentence(sentence);
    sentence.clear();
  };
  Tokenizer tok(
      [&](std::string_view w) {
        if (auto id = vocab_.find(w)) {
          sentence.push_back(*id);
          if (sentence.size() >= max_sentence_) flush();
        }
      },
      flush);
  read_range(path_, begin_, end_, [&](std::string_view chunk) { tok.feed(chunk); });
  tok.finish();
  flush();
}

}  // namespace w2bq
