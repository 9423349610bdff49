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

#include <w2bq/sweep.hpp>

#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace w2bq {

std::vector<SweepRow> sweep(const std::filesystem::path& corpus, const TrainingConfig& base,
                            const SweepGrid& grid, const AnalogyDataset& analogy,
                            const AnalogyOptions& analogy_options,
                            const std::function<void(const SweepRow&)>& on_row) {
  if (grid.bitlevels.empty() || grid.dims.empty() || grid.epochs.empty()) {
    throw std::invalid_argument("every sweep axis needs at least one value");
  }
  base.validate();
  const Vocabulary vocab = build_vocab_from_file(corpus, base.min_count);

  std::vector<SweepRow> rows;
  for (BitLevel level : grid.bitlevels) {
    for (std::size_t dim : grid.dims) {
      for (int epochs : grid.epochs) {
        TrainingConfig config = base;
        config.bitlevel = level;
        config.dim = dim;
        config.epochs = epochs;
        const auto trained = train(corpus, vocab, config);
        const auto vectors = finalize(vocab, trained.embeddings, QuantizationScheme(level));
        const auto scores = eval_analogy_both(vectors, analogy, analogy_options);
        SweepRow row{level, dim, epochs, trained.report.end_loss(), scores.add.score, scores.mul.score};
        if (on_row) on_row(row);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_sweep_csv_header(std::ostream& out) { out << kSweepCsvHeader << '\n'; }

void write_sweep_csv_row(std::ostream& out, const SweepRow& row) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d,%zu,%d,%.6f,%.6f,%.6f", bits_of(row.bitlevel), row.dim,
                row.epochs, row.end_loss, row.analogy_add, row.analogy_mul);
  out << buf << '\n';
}

}  // namespace w2bq
