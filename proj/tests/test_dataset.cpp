/*
 * Copyright 2026 The trendlab Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"
#include "trendlab/dataset.hpp"
#include "trendlab/synth.hpp"

namespace tl = trendlab;
using tl::Errc;
using tl::testing::error_code_of;
using tl::testing::error_message_of;

namespace {

tl::SequenceDataset parse_seq(const std::string& text, tl::TrendOrder order = tl::TrendOrder::Monotone) {
  std::istringstream in(text);
  return tl::parse_sequence_csv(in, {order});
}

tl::SurvivalDataset parse_surv(const std::string& text) {
  std::istringstream in(text);
  return tl::parse_survival_csv(in);
}

}  // namespace

TEST(SequenceCsv, MinimalFile) {
  const auto ds = parse_seq("seq_id,t,f0\nA,0,1.0\nA,1,2.0\n");
  ASSERT_EQ(ds.sequences.size(), 1u);
  EXPECT_EQ(ds.feature_dim, 1u);
  EXPECT_EQ(ds.sequences.at("A").size(), 2u);
  EXPECT_EQ(ds.sequences.at("A")[1].features, std::vector<double>{2.0});
  EXPECT_FALSE(ds.trend_truth.has_value());
}

TEST(SequenceCsv, DuplicateTimeIndexNamesLine) {
  const auto parse = [] { parse_seq("seq_id,t,f0\nA,1,1.0\nA,1,3.0\n"); };
  EXPECT_EQ(error_code_of(parse), Errc::DuplicateTimeIndex);
  EXPECT_NE(error_message_of(parse).find("line 3"), std::string::npos);
}

TEST(SequenceCsv, RowsAreGroupedAndSortedByTime) {
  const auto ds = parse_seq("seq_id,t,f0,tau\nB,5,0.5,2\nA,2,0.2,1\nB,1,0.1,1\nA,0,0.0,0\n");
  ASSERT_EQ(ds.sequences.size(), 2u);
  EXPECT_EQ(ds.sequences.at("B")[0].t, 1);
  EXPECT_EQ(ds.sequences.at("B")[1].t, 5);
  EXPECT_EQ(ds.trend_truth->at("A"), (std::vector<double>{0.0, 1.0}));
}

TEST(SequenceCsv, ErrorsNameTheLine) {
  EXPECT_EQ(error_code_of([] { parse_seq(""); }), Errc::MissingHeader);
  EXPECT_EQ(error_code_of([] { parse_seq("id,t,f0\nA,0,1\n"); }), Errc::MissingHeader);
  EXPECT_EQ(error_code_of([] { parse_seq("seq_id,t,f0\nA,0,1\nA,1\n"); }), Errc::RaggedRow);
  const auto nan = [] { parse_seq("seq_id,t,f0\nA,0,1\nA,1,nan\n"); };
  EXPECT_EQ(error_code_of(nan), Errc::NonFiniteValue);
  EXPECT_NE(error_message_of(nan).find("line 3"), std::string::npos);
  EXPECT_EQ(error_code_of([] { parse_seq("seq_id,t,f0\nA,0,1\nA,1,abc\n"); }), Errc::NonFiniteValue);
  EXPECT_EQ(error_code_of([] { parse_seq("seq_id,t,f0\nA,0,inf\nA,1,1\n"); }), Errc::NonFiniteValue);
}

TEST(SequenceCsv, RejectsInvalidDatasets) {
  EXPECT_EQ(error_code_of([] { parse_seq("seq_id,t,f0\nA,0,1\n"); }), Errc::SequenceTooShort);
  EXPECT_EQ(error_code_of([] { parse_seq("seq_id,t,f0\n"); }), Errc::EmptyDataset);
  EXPECT_EQ(error_code_of([] { parse_seq("seq_id,t,f0,tau\nA,0,1,2\nA,1,1,1\n"); }), Errc::InvalidDataset);
  EXPECT_NO_THROW(parse_seq("seq_id,t,f0,tau\nA,0,1,2\nA,1,1,1\n", tl::TrendOrder::Any));
  EXPECT_EQ(error_code_of([] { parse_seq("seq_id,t,f0\nA,x,1\nA,1,1\n"); }), Errc::InvalidDataset);
}

TEST(SequenceCsv, FuzzedInputsNeverYieldInvalidDatasets) {
  const std::string good = "seq_id,t,f0,f1,tau\nA,0,1.5,2,0\nA,1,-3,4e-3,0.5\nB,0,1,1,1\nB,2,2,2,2\n";
  tl::Rng rng(99);
  const std::string alphabet = ",.0123456789-eAB\nnai";
  std::size_t accepted = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text = good;
    const auto edits = 1 + rng.below(4);
    for (std::uint64_t e = 0; e < edits; ++e) {
      const auto pos = rng.below(text.size());
      switch (rng.below(3)) {
        case 0: text.erase(pos, 1); break;
        case 1: text.insert(pos, 1, alphabet[rng.below(alphabet.size())]); break;
        default: text[pos] = alphabet[rng.below(alphabet.size())]; break;
      }
    }
    try {
      const auto ds = parse_seq(text);
      EXPECT_NO_THROW(tl::validate(ds)) << text;
      ++accepted;
    } catch (const tl::Error&) {
    }
  }
  EXPECT_GT(accepted, 0u);
}

TEST(SequenceCsv, SpringsRoundTrip) {
  tl::SpringsConfig cfg;
  cfg.n_sequences = 300;
  cfg.n_balls = 3;
  cfg.sim_steps = 4;
  cfg.samples_per_sequence = 5;
  cfg.seed = 5;
  const auto gen = tl::simulate_ball_springs(cfg);
  tl::testing::TempDir dir;
  const auto path = dir.file("springs.csv");
  tl::write_sequence_dataset(gen.data, path);
  EXPECT_EQ(tl::read_sequence_dataset(path), gen.data);
}

TEST(SequenceCsv, RealsRoundTripExactly) {
  tl::Rng rng(3);
  tl::SequenceDataset ds;
  ds.feature_dim = 3;
  for (int i = 0; i < 50; ++i) {
    const double scale = std::pow(10.0, rng.uniform(-300, 300));
    ds.sequences["x"].push_back({"x", i, {rng.normal() * scale, rng.uniform(), -rng.uniform() * 1e-310}});
  }
  std::stringstream buf;
  tl::write_sequence_csv(ds, buf);
  EXPECT_EQ(tl::parse_sequence_csv(buf), ds);
}

TEST(SurvivalCsv, MinimalFile) {
  const auto ds = parse_surv("id,time,event,f0\np1,5.0,1,0.2\np2,3.0,0,0.7\n");
  ASSERT_EQ(ds.records.size(), 2u);
  EXPECT_DOUBLE_EQ(ds.censoring_rate(), 0.5);
  EXPECT_EQ(ds.records[1].id, "p2");
}

TEST(SurvivalCsv, Errors) {
  EXPECT_EQ(error_code_of([] { parse_surv("id,time,event,f0\np1,0,1,0.2\n"); }), Errc::NonPositiveTime);
  EXPECT_EQ(error_code_of([] { parse_surv("id,time,event,f0\np1,-2,1,0.2\n"); }), Errc::NonPositiveTime);
  EXPECT_EQ(error_code_of([] { parse_surv("id,time,event,f0\np1,1,2,0.2\n"); }), Errc::BadEventFlag);
  EXPECT_EQ(error_code_of([] { parse_surv("id,time,event,f0\np1,1,1\n"); }), Errc::RaggedRow);
  EXPECT_EQ(error_code_of([] { parse_surv("id,time,event,f0\np1,1,1,nan\n"); }), Errc::NonFiniteValue);
  EXPECT_EQ(error_code_of([] { parse_surv("time,id,event,f0\n"); }), Errc::MissingHeader);
}

TEST(SurvivalCsv, GeneratedFileMatchesCensoringTarget) {
  tl::SurvivalConfig cfg;
  cfg.seed = 17;
  const auto gen = tl::generate_survival(cfg);
  tl::testing::TempDir dir;
  const auto path = dir.file("surv.csv");
  tl::write_survival_dataset(gen.data, path);
  const auto back = tl::read_survival_dataset(path);
  EXPECT_EQ(back, gen.data);
  std::size_t censored = 0;
  for (const auto& r : back.records) censored += r.event == 0;
  EXPECT_NEAR(static_cast<double>(censored) / 2000.0, 0.5, 0.05);
}

TEST(Sidecar, RoundTrip) {
  tl::testing::TempDir dir;
  EXPECT_EQ(tl::sidecar_path("/a/b/data.csv"), "/a/b/data.meta.csv");
  EXPECT_EQ(tl::sidecar_path("data"), "data.meta.csv");
  const tl::Sidecar meta{"seq_id", "alpha", {{"s00000", 0.95}, {"s00001", 0.1 + 0.2}}};
  tl::write_sidecar(meta, dir.file("m.meta.csv"));
  const auto back = tl::read_sidecar(dir.file("m.meta.csv"));
  EXPECT_EQ(back.key_name, "seq_id");
  EXPECT_EQ(back.rows, meta.rows);
}
