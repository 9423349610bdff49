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

#include <w2bq/trainer.hpp>

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace w2bq::cli {

enum class ExitCode : int { ok = 0, usage = 1, runtime = 2 };

/// Everything the command line can set. Populated by parse().
struct Options {
  std::string command;

  // train / sweep / vocab
  std::string corpus;
  std::string out;
  TrainingConfig training;
  int bitlevel = 1;
  std::string save_full;
  std::string vocab_out;
  std::string dump_config;
  std::string config;
  bool fixed_window = false;
  bool no_context_average = false;
  bool progress = false;

  // eval-sim / eval-analogy / neighbors / convert
  std::string vectors;
  std::vector<std::string> datasets;
  std::string method = "both";
  std::size_t restrict_vocab = 0;
  std::string word;
  std::size_t count = 100;
  std::string in;
  bool threshold_t1 = false;

  // sweep
  std::string analogy;
  std::vector<int> sweep_bitlevels = {1, 32};
  std::vector<std::size_t> sweep_dims = {100, 200, 400, 600, 800, 1000};
  std::vector<int> sweep_epochs = {1, 10, 25, 50};
};

/// Command-line front end. One instance parses and runs one command.
class Cli {
public:
  Cli();
  ~Cli();
  Cli(const Cli&) = delete;
  Cli& operator=(const Cli&) = delete;

  /// Parses without executing. Throws CLI::ParseError on usage errors.
  void parse(const std::vector<std::string>& args);

  /// Parses and executes; prints results to `out` and diagnostics to `err`.
  ExitCode run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

  const Options& options() const noexcept { return options_; }

  /// Flat `key = value` rendering of the train flags as parsed.
  std::string train_config_text() const;

private:
  void finish_parse();
  void execute(std::ostream& out, std::ostream& err);

  Options options_;
  std::unique_ptr<CLI::App> app_;
  CLI::App* train_ = nullptr;
};

/// argv entry point: returns the process exit status.
int parse_and_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace w2bq::cli
