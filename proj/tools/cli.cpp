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

#include "cli.hpp"

#include <w2bq/corpus.hpp>
#include <w2bq/eval.hpp>
#include <w2bq/sweep.hpp>
#include <w2bq/vectors.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

namespace w2bq::cli {

namespace {

std::size_t default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

bool is_packed_path(const std::string& path) {
  return std::filesystem::path(path).extension() == ".w2bq";
}

void save_vectors(const WordVectors& vecs, const std::string& path) {
  if (is_packed_path(path)) {
    if (!is_quantized(vecs.bitlevel())) {
      throw CLI::ValidationError("--out",
                                 "packed .w2bq output needs 1- or 2-bit vectors; use a text path "
                                 "or --threshold-t1");
    }
    save_packed(vecs, std::filesystem::path(path));
  } else {
    save_text(vecs, std::filesystem::path(path));
  }
}

// Options shared by train and sweep. The grid axes (bit level, dimension,
// epochs) are only added for train.
void add_training_options(CLI::App* cmd, Options& o, bool grid_axes) {
  auto& t = o.training;
  cmd->add_option("--corpus", o.corpus, "UTF-8 training text; newlines end sentences")
      ->required()
      ->check(CLI::ExistingFile);
  if (grid_axes) {
    cmd->add_option("--dim", t.dim, "Vector dimension (reference setting 800)")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));
    cmd->add_option("--epochs", t.epochs, "Passes over the corpus (reference setting 25)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--bitlevel", o.bitlevel,
                    "Bits per parameter: 1, 2, or 32 for full precision (default 1)")
        ->check(CLI::IsMember({1, 2, 32}));
  }
  cmd->add_option("--window", t.window, "Context window radius (reference setting 10)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--negative", t.negatives, "Negative samples per window (reference setting 12)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--lr", t.lr_start, "Starting learning rate (reference setting 0.05)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--lr-end", t.lr_end, "Final learning rate of the linear decay (reference setting 0.0001)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--sample", t.sample, "Subsampling threshold t (reference setting 1e-4)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--min-count", t.min_count, "Drop words seen fewer times (reference setting 5)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--alpha", t.alpha, "Negative-sampling unigram exponent (default 0.75)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--workers", t.workers, "Lock-free training threads (default: hardware threads)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", t.seed, "Random seed; runs are reproducible with --workers 1 (default 1)");
  cmd->add_flag("--fixed-window", o.fixed_window,
                "Use the full window radius instead of a random radius in [1, window]");
  cmd->add_flag("--no-context-average", o.no_context_average,
                "Sum the quantized context vectors instead of averaging them");
  cmd->add_flag("--max-abs", t.track_max_abs,
                "Track the largest absolute parameter value (shown with --progress)");
  cmd->add_flag("--progress", o.progress, "Print the mean loss of every 1% of training to stderr");
}

// `train --config FILE` becomes `train --key=value ... <remaining args>` so the
// explicit flags, which come later, take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.empty() || args.front() != "train") return args;
  std::vector<std::string> rest;
  std::string path;
  bool found = false;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
      found = true;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      found = true;
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!found) return args;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  std::vector<std::string> out = {"train"};
  for (const auto& item : CLI::ConfigTOML().from_config(in)) {
    if (item.name.empty() || item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty()) throw CLI::ConfigError("sections are not supported: " + item.fullname());
    if (item.inputs.size() != 1) throw CLI::ConfigError("expected one value for " + item.name);
    if (item.inputs.front().empty()) continue;  // unset path; same as the default
    out.push_back("--" + item.name + "=" + item.inputs.front());
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

void print_progress(std::ostream& err, const ProgressEvent& ev, bool with_max) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "progress %3zu%%  loss %.5f  lr %.6f  words %llu", ev.interval + 1,
                ev.mean_loss, ev.learning_rate, static_cast<unsigned long long>(ev.words));
  err << buf;
  if (with_max) err << "  max|param| " << ev.max_abs;
  err << '\n';
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

}  // namespace

Cli::Cli() : app_(std::make_unique<CLI::App>("Quantized word vector trainer and evaluator", "w2bq")) {
  auto& o = options_;
  o.training.workers = default_workers();
  app_->require_subcommand(1);
  app_->option_defaults()->always_capture_default();

  train_ = app_->add_subcommand("train", "Train word vectors on a text corpus");
  add_training_options(train_, o, true);
  train_->add_option("--out", o.out, "Output vectors: .w2bq for packed 1/2-bit, anything else for text")
      ->required();
  train_->add_option("--save-full", o.save_full,
                     "Also write the full-precision sums u+v as text (for T1 thresholding)");
  train_->add_option("--vocab-out", o.vocab_out, "Also write the vocabulary as word<TAB>count");
  // A value from --config may be repeated on the command line; the last one wins.
  for (auto* opt : train_->get_options()) {
    if (opt->get_expected_max() == 1) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
  // Expanded into arguments by parse(); registered here for help and checks.
  train_->add_option("--config", o.config,
                     "Read flags from a flat key = value file; later command-line flags win")
      ->configurable(false);
  train_->add_option("--dump-config", o.dump_config,
                     "Write the effective flags as key = value to this path")
      ->configurable(false);

  auto* sim = app_->add_subcommand("eval-sim", "Spearman correlation on word-similarity datasets");
  sim->add_option("--vectors", o.vectors, "Packed or text vectors")->required()->check(CLI::ExistingFile);
  sim->add_option("--dataset", o.datasets, "word1 word2 score files")->required()->check(CLI::ExistingFile);

  auto* ana = app_->add_subcommand("eval-analogy", "3CosAdd / 3CosMul accuracy on analogy datasets");
  ana->add_option("--vectors", o.vectors, "Packed or text vectors")->required()->check(CLI::ExistingFile);
  ana->add_option("--dataset", o.datasets, "Analogy files (4 words per line, ':' categories)")
      ->required()
      ->check(CLI::ExistingFile);
  ana->add_option("--method", o.method, "add, mul or both")->check(CLI::IsMember({"add", "mul", "both"}));
  ana->add_option("--restrict", o.restrict_vocab, "Only use the N most frequent words (0 = all)");

  auto* nb = app_->add_subcommand("neighbors", "Closest and furthest words by dot product");
  nb->add_option("--vectors", o.vectors, "Packed or text vectors")->required()->check(CLI::ExistingFile);
  nb->add_option("--word", o.word, "Target word")->required();
  nb->add_option("-n,--count", o.count, "How many of each to list (default 100)")->check(CLI::PositiveNumber);

  auto* sw = app_->add_subcommand("sweep", "Train a grid of configurations and write a CSV");
  add_training_options(sw, o, false);
  sw->add_option("--analogy", o.analogy, "Analogy dataset scored for every run")
      ->required()
      ->check(CLI::ExistingFile);
  sw->add_option("--out", o.out, "CSV output path")->required();
  sw->add_option("--bitlevels", o.sweep_bitlevels, "Bit levels to train (default 1,32)")
      ->delimiter(',')
      ->check(CLI::IsMember({1, 2, 32}));
  sw->add_option("--dims", o.sweep_dims, "Dimensions to train (default 100,...,1000)")->delimiter(',');
  sw->add_option("--epochs-list", o.sweep_epochs, "Epoch counts to train (default 1,10,25,50)")
      ->delimiter(',');
  sw->add_option("--restrict", o.restrict_vocab, "Analogy candidates limited to the N most frequent words");

  auto* conv = app_->add_subcommand("convert", "Convert between text and packed vectors");
  conv->add_option("--in", o.in, "Input vectors (format detected)")->required()->check(CLI::ExistingFile);
  conv->add_option("--out", o.out, "Output path: .w2bq for packed, anything else for text")->required();
  conv->add_flag("--threshold-t1", o.threshold_t1, "Apply the 1-bit quantizer to full-precision input");

  auto* voc = app_->add_subcommand("vocab", "Print the min-count filtered vocabulary");
  voc->add_option("--corpus", o.corpus, "UTF-8 text")->required()->check(CLI::ExistingFile);
  voc->add_option("--min-count", o.training.min_count, "Minimum frequency (default 5)")
      ->check(CLI::PositiveNumber);
  voc->add_option("--out", o.out, "Write here instead of stdout");
}

Cli::~Cli() = default;

void Cli::parse(const std::vector<std::string>& args) {
  const auto expanded = expand_config(args);
  std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
  app_->parse(reversed);
  finish_parse();
}

void Cli::finish_parse() {
  for (auto* sub : app_->get_subcommands()) options_.command = sub->get_name();
  options_.training.bitlevel = bitlevel_from_int(options_.bitlevel);
  options_.training.dynamic_window = !options_.fixed_window;
  options_.training.average_context = !options_.no_context_average;
  if (options_.command == "train" || options_.command == "sweep") {
    try {
      options_.training.validate();
    } catch (const std::invalid_argument& e) {
      throw CLI::ValidationError(e.what());
    }
  }
  if (options_.command == "train" && is_packed_path(options_.out) &&
      options_.training.bitlevel == BitLevel::full) {
    throw CLI::ValidationError("--out", "packed .w2bq output needs --bitlevel 1 or 2");
  }
  if (options_.command == "sweep") {
    if (options_.sweep_bitlevels.empty() || options_.sweep_dims.empty() || options_.sweep_epochs.empty()) {
      throw CLI::ValidationError("sweep axes must not be empty");
    }
    for (auto d : options_.sweep_dims) {
      if (d == 0) throw CLI::ValidationError("--dims", "dimensions must be positive");
    }
    for (auto e : options_.sweep_epochs) {
      if (e <= 0) throw CLI::ValidationError("--epochs-list", "epoch counts must be positive");
    }
  }
}

std::string Cli::train_config_text() const {
  // CLI11 writes key=value; spacing is normalized to key = value.
  std::istringstream raw(train_->config_to_str(true, false));
  std::string out;
  for (std::string line; std::getline(raw, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos || line.rfind("dump-config", 0) == 0 || line.rfind("config", 0) == 0) continue;
    out += line.substr(0, eq) + " = " + line.substr(eq + 1) + "\n";
  }
  return out;
}

ExitCode Cli::run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app_->help();
    return ExitCode::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app_->help("", CLI::AppFormatMode::All);
    return ExitCode::ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return ExitCode::usage;
  }
  try {
    execute(out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::runtime;
  }
  return ExitCode::ok;
}

void Cli::execute(std::ostream& out, std::ostream& err) {
  const auto& o = options_;

  if (o.command == "train") {
    if (!o.dump_config.empty()) {
      std::ofstream cfg(o.dump_config);
      if (!cfg) throw Error("cannot write config to " + o.dump_config);
      cfg << train_config_text();
    }
    const Vocabulary vocab = build_vocab_from_file(o.corpus, o.training.min_count);
    if (!o.vocab_out.empty()) {
      std::ofstream v(o.vocab_out);
      if (!v) throw Error("cannot write vocabulary to " + o.vocab_out);
      vocab.save(v);
    }
    ProgressCallback progress;
    if (o.progress) {
      progress = [&err, track = o.training.track_max_abs](const ProgressEvent& ev) {
        print_progress(err, ev, track);
      };
    }
    const auto result = train(o.corpus, vocab, o.training, progress);
    const auto& rep = result.report;
    err << "trained " << vocab.size() << " words x " << o.training.dim << " dims, "
        << rep.updates << " updates in " << rep.seconds << " s";
    if (rep.updates > 0) err << "; end loss " << rep.end_loss();
    err << '\n';
    save_vectors(finalize(vocab, result.embeddings, QuantizationScheme(o.training.bitlevel)), o.out);
    if (!o.save_full.empty()) {
      save_text(finalize(vocab, result.embeddings, QuantizationScheme(BitLevel::full)),
                std::filesystem::path(o.save_full));
    }
    return;
  }

  if (o.command == "eval-sim") {
    const auto vecs = normalize_rows(load_vectors(o.vectors));
    for (const auto& path : o.datasets) {
      const auto ds = load_similarity(std::filesystem::path(path));
      out << format_result_tsv(ds.name, eval_similarity(vecs, ds)) << '\n';
    }
    return;
  }

  if (o.command == "eval-analogy") {
    const auto vecs = normalize_rows(load_vectors(o.vectors));
    AnalogyOptions opts;
    opts.restrict_vocab = o.restrict_vocab;
    for (const auto& path : o.datasets) {
      const auto ds = load_analogy(std::filesystem::path(path));
      const auto scores = eval_analogy_both(vecs, ds, opts);
      if (o.method != "mul") out << format_result_tsv(ds.name + ":add", scores.add) << '\n';
      if (o.method != "add") out << format_result_tsv(ds.name + ":mul", scores.mul) << '\n';
    }
    return;
  }

  if (o.command == "neighbors") {
    const auto vecs = load_vectors(o.vectors);
    const auto lists = neighbors(vecs, o.word, std::min(o.count, vecs.size() - 1));
    char buf[64];
    auto emit = [&](const char* kind, const std::vector<Neighbor>& list) {
      for (std::size_t i = 0; i < list.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6f", list[i].score);
        out << kind << '\t' << i + 1 << '\t' << list[i].word << '\t' << buf << '\n';
      }
    };
    emit("closest", lists.closest);
    emit("furthest", lists.furthest);
    return;
  }

  if (o.command == "sweep") {
    SweepGrid grid;
    for (int b : o.sweep_bitlevels) grid.bitlevels.push_back(bitlevel_from_int(b));
    grid.dims = o.sweep_dims;
    grid.epochs = o.sweep_epochs;
    std::ofstream csv(o.out);
    if (!csv) throw Error("cannot write " + o.out);
    write_sweep_csv_header(csv);
    AnalogyOptions opts;
    opts.restrict_vocab = o.restrict_vocab;
    const auto analogy = load_analogy(std::filesystem::path(o.analogy));
    sweep(o.corpus, o.training, grid, analogy, opts, [&](const SweepRow& row) {
      write_sweep_csv_row(csv, row);
      csv.flush();
      if (o.progress) write_sweep_csv_row(err, row);
    });
    err << "sweep: bitlevels " << join(o.sweep_bitlevels) << ", dims " << join(o.sweep_dims)
        << ", epochs " << join(o.sweep_epochs) << " -> " << o.out << '\n';
    return;
  }

  if (o.command == "convert") {
    auto vecs = load_vectors(o.in);
    if (o.threshold_t1) vecs = threshold_t1(vecs);
    save_vectors(vecs, o.out);
    return;
  }

  if (o.command == "vocab") {
    const auto vocab = build_vocab_from_file(o.corpus, o.training.min_count);
    if (o.out.empty()) {
      vocab.save(out);
    } else {
      std::ofstream v(o.out);
      if (!v) throw Error("cannot write " + o.out);
      vocab.save(v);
    }
    return;
  }
}

int parse_and_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  Cli cli;
  return static_cast<int>(cli.run(args, out, err));
}

}  // namespace w2bq::cli
