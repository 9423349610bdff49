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

#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

#include <doctest.h>

#include <sstream>

using namespace w2bq;

namespace {

TrainingConfig small_config() {
  TrainingConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 1;
  cfg.workers = 1;
  cfg.min_count = 2;
  return cfg;
}

AnalogyDataset toy_analogy() {
  // Words of the synthetic corpus; only membership matters here.
  return AnalogyDataset{"toy", {{"fa", "fb", "fc", "fd", ""}, {"wa", "wb", "wc", "wd", ""}}};
}

}  // namespace

TEST_CASE("sweep grid cardinality") {
  testing::TempDir dir;
  const auto corpus = dir.file("c.txt");
  oracle::write_topic_corpus(corpus, 20000, 5);

  auto rows = sweep(corpus, small_config(), SweepGrid{{BitLevel::one}, {8}, {1}}, toy_analogy());
  CHECK(rows.size() == 1);

  std::vector<SweepRow> streamed;
  rows = sweep(corpus, small_config(), SweepGrid{{BitLevel::one, BitLevel::full}, {100}, {1}}, toy_analogy(), {},
               [&](const SweepRow& r) { streamed.push_back(r); });
  REQUIRE(rows.size() == 2);
  CHECK(streamed.size() == 2);
  CHECK(rows[0].bitlevel == BitLevel::one);
  CHECK(rows[1].bitlevel == BitLevel::full);
  for (const auto& r : rows) {
    CHECK(r.dim == 100);
    CHECK(r.epochs == 1);
    CHECK(r.end_loss > 0.0);
    CHECK(r.analogy_add >= 0.0);
    CHECK(r.analogy_add <= 1.0);
  }

  rows = sweep(corpus, small_config(), SweepGrid{{BitLevel::one}, {4, 8}, {1, 2}}, toy_analogy());
  CHECK(rows.size() == 4);
  CHECK(rows[1].dim == 4);
  CHECK(rows[1].epochs == 2);
}

TEST_CASE("sweep CSV") {
  std::ostringstream out;
  write_sweep_csv_header(out);
  write_sweep_csv_row(out, SweepRow{BitLevel::two, 200, 10, 1.25, 0.5, 0.25});
  const std::string s = out.str();
  CHECK(s.rfind(std::string(kSweepCsvHeader) + "\n", 0) == 0);
  CHECK(s.find("\n2,200,10,") != std::string::npos);
}
