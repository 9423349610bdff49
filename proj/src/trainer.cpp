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

#include <w2bq/trainer.hpp>

#include <chrono>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace w2bq {

EmbeddingPair init_embeddings(std::size_t vocab_size, std::size_t dim, Rng& rng) {
  if (vocab_size == 0 || dim == 0) throw std::invalid_argument("embedding shape must be non-empty");
  EmbeddingPair emb(vocab_size, dim);
  const double half_width = 0.5 / static_cast<double>(dim);
  for (auto& x : emb.center.values()) {
    x = static_cast<float>((uniform01(rng) * 2.0 - 1.0) * half_width);
  }
  return emb;
}

void TrainingConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (dim < 1) fail("dimension must be at least 1");
  if (window < 1) fail("window size must be at least 1");
  if (negatives < 1) fail("negative sample count must be at least 1");
  if (epochs < 1) fail("epoch count must be at least 1");
  if (!(lr_end > 0.0)) fail("final learning rate must be positive");
  if (!(lr_start > lr_end)) fail("starting learning rate must exceed the final learning rate");
  if (!(sample > 0.0)) fail("subsample threshold must be positive");
  if (min_count < 1) fail("min count must be at least 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail("sampler exponent must be finite and >= 0");
  if (workers < 1) fail("worker count must be at least 1");
}

double learning_rate_at(double progress, double lr_start, double lr_end) {
  const double p = std::clamp(progress, 0.0, 1.0);
  return std::max(lr_end, lr_start + p * (lr_end - lr_start));
}

double TrainingReport::interval_mean(std::size_t i) const {
  if (interval_updates.at(i) == 0) return std::numeric_limits<double>::quiet_NaN();
  return interval_loss_sum[i] / static_cast<double>(interval_updates[i]);
}

double TrainingReport::mean_loss(std::size_t first, std::size_t last) const {
  double sum = 0;
  std::uint64_t n = 0;
  for (std::size_t i = first; i < std::min(last, kReportIntervals); ++i) {
    sum += interval_loss_sum[i];
    n += interval_updates[i];
  }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
}

double TrainingReport::end_loss() const {
  for (std::size_t i = kReportIntervals; i-- > 0;) {
    if (interval_updates[i] > 0) return interval_mean(i);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

struct SharedState {
  std::atomic<std::uint64_t> words{0};
  std::atomic<bool> abort{false};
  std::atomic<std::size_t> announced{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::mutex progress_mutex;
};

struct WorkerReport {
  std::vector<double> loss_sum = std::vector<double>(kReportIntervals, 0.0);
  std::vector<std::uint64_t> updates = std::vector<std::uint64_t>(kReportIntervals, 0);
  std::vector<double> learning_rate = std::vector<double>(kReportIntervals, -1.0);
  float max_abs = 0;
};

std::size_t interval_of(double progress) {
  const auto i = static_cast<std::size_t>(progress * static_cast<double>(kReportIntervals));
  return std::min(i, kReportIntervals - 1);
}

class Worker {
public:
  Worker(std::size_t id, const std::filesystem::path& corpus, const Vocabulary& vocab,
         const UnigramTable& table, const TrainingConfig& config, std::uint64_t begin,
         std::uint64_t end, EmbeddingPair& emb, SharedState& shared,
         const ProgressCallback& progress)
      : id_(id),
        corpus_(corpus),
        vocab_(vocab),
        table_(table),
        config_(config),
        begin_(begin),
        end_(end),
        emb_(emb),
        shared_(shared),
        progress_(progress),
        rng_(make_rng(config.seed, id + 1)),
        windows_(vocab, WindowOptions{config.window, config.sample, config.dynamic_window}),
        negatives_(static_cast<std::size_t>(config.negatives)),
        options_{config.bitlevel, config.average_context},
        total_words_(static_cast<double>(vocab.total_tokens()) * config.epochs) {}

  void run() {
    sync(0);
    for (int epoch = 0; epoch < config_.epochs && !shared_.abort.load(); ++epoch) {
      SentenceReader reader(corpus_, vocab_, begin_, end_);
      reader.run([&](std::span<const WordId> sentence) {
        if (shared_.abort.load(std::memory_order_relaxed)) return;
        train_sentence(sentence);
      });
      sync(pending_words_);
    }
  }

  const WorkerReport& report() const noexcept { return report_; }

private:
  void train_sentence(std::span<const WordId> sentence) {
    pending_words_ += sentence.size();
    if (pending_words_ >= kLearningRateRefreshWords) sync(pending_words_);
    float* peak = config_.track_max_abs ? &report_.max_abs : nullptr;
    const float lr = static_cast<float>(lr_);
    windows_.for_each_window(sentence, rng_, [&](WordId center, std::span<const WordId> context) {
      draw_negatives(table_, center, rng_, negatives_);
      const float loss = cbow_update<RelaxedAccess>(emb_, center, context, negatives_, lr,
                                                    options_, scratch_, peak);
      report_.loss_sum[interval_] += loss;
      ++report_.updates[interval_];
    });
  }

  void sync(std::uint64_t words) {
    const std::uint64_t global = shared_.words.fetch_add(words) + words;
    pending_words_ = 0;
    const double progress = static_cast<double>(global) / total_words_;
    lr_ = learning_rate_at(progress, config_.lr_start, config_.lr_end);
    const std::size_t next = interval_of(progress);
    if (next != interval_) announce(interval_, global);
    interval_ = next;
    if (report_.learning_rate[interval_] < 0) report_.learning_rate[interval_] = lr_;
  }

  void announce(std::size_t finished, std::uint64_t global) {
    if (!progress_) return;
    std::size_t seen = shared_.announced.load();
    while (seen <= finished) {
      if (shared_.announced.compare_exchange_weak(seen, finished + 1)) {
        ProgressEvent ev;
        ev.interval = finished;
        ev.mean_loss = report_.updates[finished] == 0
                           ? std::numeric_limits<double>::quiet_NaN()
                           : report_.loss_sum[finished] / static_cast<double>(report_.updates[finished]);
        ev.learning_rate = lr_;
        ev.words = global;
        ev.max_abs = report_.max_abs;
        std::lock_guard lock(shared_.progress_mutex);
        progress_(ev);
        return;
      }
    }
  }

  std::size_t id_;
  const std::filesystem::path& corpus_;
  const Vocabulary& vocab_;
  const UnigramTable& table_;
  const TrainingConfig& config_;
  std::uint64_t begin_;
  std::uint64_t end_;
  EmbeddingPair& emb_;
  SharedState& shared_;
  const ProgressCallback& progress_;

  Rng rng_;
  WindowGenerator windows_;
  std::vector<WordId> negatives_;
  CbowOptions options_;
  CbowScratch<float> scratch_;
  WorkerReport report_;
  double total_words_;
  double lr_ = 0;
  std::uint64_t pending_words_ = 0;
  std::size_t interval_ = 0;
};

}  // namespace

TrainingResult train(const std::filesystem::path& corpus, const Vocabulary& vocab,
                     const TrainingConfig& config, const ProgressCallback& progress) {
  config.validate();
  if (vocab.empty()) throw EmptyVocabularyError("cannot train with an empty vocabulary");
  const auto started = std::chrono::steady_clock::now();

  Rng init_rng = make_rng(config.seed, 0);
  TrainingResult result{init_embeddings(vocab.size(), config.dim, init_rng), {}};
  const UnigramTable table(vocab, config.alpha);
  const auto bounds = shard_boundaries(corpus, config.workers);

  SharedState shared;
  std::vector<Worker> workers;
  workers.reserve(config.workers);
  for (std::size_t i = 0; i < config.workers; ++i) {
    workers.emplace_back(i, corpus, vocab, table, config, bounds[i], bounds[i + 1],
                         result.embeddings, shared, progress);
  }

  auto guarded = [&shared](Worker& w) {
    try {
      w.run();
    } catch (...) {
      std::lock_guard lock(shared.error_mutex);
      if (!shared.error) shared.error = std::current_exception();
      shared.abort.store(true);
    }
  };
  if (workers.size() == 1) {
    guarded(workers.front());
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(workers.size());
    for (auto& w : workers) threads.emplace_back(guarded, std::ref(w));
  }
  if (shared.error) std::rethrow_exception(shared.error);

  TrainingReport& report = result.report;
  for (auto& lr : report.learning_rate) lr = -1.0;
  for (const auto& w : workers) {
    const auto& r = w.report();
    for (std::size_t i = 0; i < kReportIntervals; ++i) {
      report.interval_loss_sum[i] += r.loss_sum[i];
      report.interval_updates[i] += r.updates[i];
      if (report.learning_rate[i] < 0) report.learning_rate[i] = r.learning_rate[i];
    }
    report.max_abs = std::max(report.max_abs, static_cast<double>(r.max_abs));
  }
  for (std::size_t i = 0; i < kReportIntervals; ++i) {
    if (report.learning_rate[i] < 0) {
      report.learning_rate[i] = learning_rate_at(static_cast<double>(i) / kReportIntervals,
                                                 config.lr_start, config.lr_end);
    }
    report.updates += report.interval_updates[i];
  }
  report.words_processed = shared.words.load();
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

TrainingResult train(const std::filesystem::path& corpus, const TrainingConfig& config,
                     const ProgressCallback& progress) {
  config.validate();
  const Vocabulary vocab = build_vocab_from_file(corpus, config.min_count);
  return train(corpus, vocab, config, progress);
}

}  // namespace w2bq
