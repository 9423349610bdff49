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

#include <w2bq/random.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <algorithm>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace w2bq {

using WordId = std::uint32_t;

// ---------------------------------------------------------------------------
// Tokenization
//
// A token is a maximal run of alphabetic code points, case preserved. Digits,
// punctuation, whitespace, symbols and invalid UTF-8 (read as U+FFFD) are
// separators. A newline additionally ends the current sentence.

/// True for code points treated as letters.
bool is_alphabetic(char32_t cp) noexcept;

/// Incremental tokenizer; feed() may split input anywhere, even inside a
/// UTF-8 sequence.
class Tokenizer {
public:
  using WordSink = std::function<void(std::string_view)>;
  using NewlineSink = std::function<void()>;

  Tokenizer(WordSink on_word, NewlineSink on_newline = {});

  void feed(std::string_view bytes);
  /// Flushes a pending word. Call once after the last feed().
  void finish();

private:
  void byte(unsigned char b);
  void code_point(char32_t cp, std::string_view bytes);
  void separator();

  WordSink on_word_;
  NewlineSink on_newline_;
  std::string word_;
  char pending_[4] = {};
  int pending_len_ = 0;
  int pending_need_ = 0;
  char32_t pending_cp_ = 0;
};

std::vector<std::string> normalize_text(std::string_view raw);

// ---------------------------------------------------------------------------
// Vocabulary

/// Transparent hash so string_view lookups do not allocate.
struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

class Vocabulary {
public:
  Vocabulary() = default;

  /// Words must already be sorted by descending count; used by loaders.
  Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts);

  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }
  std::uint64_t total_tokens() const noexcept { return total_; }

  const std::string& word(WordId id) const { return words_.at(id); }
  std::uint64_t count(WordId id) const { return counts_.at(id); }
  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

  std::optional<WordId> find(std::string_view word) const;

  /// `word<TAB>count` per line, descending count.
  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_ && a.counts_ == b.counts_;
  }

private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, WordId, StringHash, std::equal_to<>> index_;
  std::uint64_t total_ = 0;
};

/// Counts tokens and keeps first-occurrence order for deterministic ties.
class VocabularyBuilder {
public:
  void add(std::string_view token);
  /// Throws EmptyVocabularyError when nothing reaches min_count.
  Vocabulary build(std::uint64_t min_count) const;

private:
  struct Entry {
    std::uint64_t count = 0;
    std::uint64_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry, StringHash, std::equal_to<>> counts_;
  std::uint64_t seen_ = 0;
};

Vocabulary build_vocab(std::span<const std::string> tokens, std::uint64_t min_count);

/// Streams a text file once and builds its vocabulary.
Vocabulary build_vocab_from_file(const std::filesystem::path& path, std::uint64_t min_count);

// ---------------------------------------------------------------------------
// Subsampling and windows

/// min(1, sqrt(t / f)) with f = word_count / total_tokens.
double keep_probability(std::uint64_t word_count, std::uint64_t total_tokens, double threshold);

struct TrainingWindow {
  WordId center = 0;
  std::vector<WordId> context;

  friend bool operator==(const TrainingWindow&, const TrainingWindow&) = default;
};

struct WindowOptions {
  int window = 10;
  /// Subsampling threshold t; values <= 0 disable subsampling.
  double sample = 1e-4;
  /// When false, every window uses the full radius.
  bool dynamic_window = true;
};

/// Turns sentences of in-vocabulary ids into subsampled CBOW windows.
class WindowGenerator {
public:
  WindowGenerator(const Vocabulary& vocab, WindowOptions options);

  const WindowOptions& options() const noexcept { return options_; }

  /// Calls `emit(center, context)` for every window of `sentence` with a
  /// non-empty context. `context` is only valid during the call.
  template <typename Emit>
  void for_each_window(std::span<const WordId> sentence, Rng& rng, Emit&& emit);

private:
  WindowOptions options_;
  std::vector<double> keep_;
  std::vector<WordId> kept_;
  std::vector<WordId> context_;
};

template <typename Emit>
void WindowGenerator::for_each_window(std::span<const WordId> sentence, Rng& rng, Emit&& emit) {
  kept_.clear();
  for (WordId id : sentence) {
    const double keep = keep_[id];
    if (keep >= 1.0 || uniform01(rng) < keep) kept_.push_back(id);
  }
  const std::size_t n = kept_.size();
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t radius = options_.dynamic_window
                                   ? uniform_int(rng, 1, static_cast<std::uint64_t>(options_.window))
                                   : static_cast<std::size_t>(options_.window);
    const std::size_t lo = pos >= radius ? pos - radius : 0;
    const std::size_t hi = std::min(n - 1, pos + radius);
    context_.clear();
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j != pos) context_.push_back(kept_[j]);
    }
    if (!context_.empty()) emit(kept_[pos], std::span<const WordId>(context_));
  }
}

/// Whole-stream convenience: OOV tokens are dropped and the list is treated as
/// one sentence.
std::vector<TrainingWindow> iterate_windows(std::span<const std::string> tokens,
                                            const Vocabulary& vocab, const WindowOptions& options,
                                            Rng& rng);

// ---------------------------------------------------------------------------
// Sharded file streaming

/// Byte offsets splitting a file into `shards` ranges. Interior boundaries are
/// moved forward onto an ASCII separator byte so no token straddles two shards.
std::vector<std::uint64_t> shard_boundaries(const std::filesystem::path& path, std::size_t shards);

/// Sentence-level reader over one byte range of a text file. Sentences end at
/// newlines and are additionally cut every `max_sentence` in-vocabulary tokens.
class SentenceReader {
public:
  SentenceReader(const std::filesystem::path& path, const Vocabulary& vocab,
                 std::uint64_t begin, std::uint64_t end, std::size_t max_sentence = 1000);

  /// Calls `on_sentence(ids)` once per non-empty sentence, OOV tokens removed.
  void run(const std::function<void(std::span<const WordId>)>& on_sentence);

private:
  std::filesystem::path path_;
  const Vocabulary& vocab_;
  std::uint64_t begin_;
  std::uint64_t end_;
  std::size_t max_sentence_;
};

}  // namespace w2bq
