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

#include <w2bq/eval.hpp>
#include <w2bq/trainer.hpp>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace w2bq {

/// Axes of a training grid; every combination is trained once.
struct SweepGrid {
  std::vector<BitLevel> bitlevels;
  std::vector<std::size_t> dims;
  std::vector<int> epochs;
};

struct SweepRow {
  BitLevel bitlevel = BitLevel::full;
  std::size_t dim = 0;
  int epochs = 0;
  double end_loss = 0;
  double analogy_add = 0;
  double analogy_mul = 0;
};

inline constexpr std::string_view kSweepCsvHeader = "bitlevel,dim,epochs,end_loss,analogy_add,analogy_mul";

/// Trains every (bitlevel, dim, epochs) combination from `base`, reporting the
/// final-interval loss and analogy accuracy. The vocabulary is built once.
std::vector<SweepRow> sweep(const std::filesystem::path& corpus, const TrainingConfig& base,
                            const SweepGrid& grid, const AnalogyDataset& analogy,
                            const AnalogyOptions& analogy_options = {},
                            const std::function<void(const SweepRow&)>& on_row = {});

void write_sweep_csv_header(std::ostream& out);
void write_sweep_csv_row(std::ostream& out, const SweepRow& row);

}  // namespace w2bq
