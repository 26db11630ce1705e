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

#include <cmath>
#include <set>

#include "support.hpp"
#include "trendlab/cte.hpp"
#include "trendlab/stats.hpp"
#include "trendlab/synth.hpp"

namespace tl = trendlab;
using tl::Errc;
using tl::testing::error_code_of;

namespace {

std::vector<double> random_vector(tl::Rng& rng, std::size_t n, double sd = 1.0) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal(0.0, sd);
  return x;
}

tl::SequenceDataset ramp_dataset(std::size_t n_seq, std::size_t len, std::uint64_t seed) {
  tl::Rng rng(seed);
  tl::SequenceDataset ds;
  ds.feature_dim = 1;
  for (std::size_t s = 0; s < n_seq; ++s) {
    const std::string id = tl::sequence_name(s);
    double tau = rng.uniform(-3, 3);
    for (std::size_t i = 0; i < len; ++i) {
      tau += rng.exponential(1.0);
      ds.sequences[id].push_back({id, static_cast<std::int64_t>(i), {tau}});
    }
  }
  return ds;
}

// Loss of one pair as a function of the raw parameters (for finite differences).
double pair_objective(const tl::ParamSet& p, const std::vector<double>& xu, const std::vector<double>& xv, int label,
                      tl::LossKind kind) {
  const double su = tl::forward(p, tl::Activation::Tanh, xu).score;
  const double sv = tl::forward(p, tl::Activation::Tanh, xv).score;
  return tl::pair_loss(tl::sigmoid(sv - su), label, kind);
}

}  // namespace

TEST(PairProbability, IdenticalInputsGiveHalf) {
  const auto m = tl::EmbeddingModel::untrained({3, 5, 2}, 4);
  const std::vector<double> x{0.3, -2.0, 7.0};
  EXPECT_EQ(tl::pair_probability(m, x, x), 0.5);
}

TEST(PairProbability, Antisymmetric) {
  const auto m = tl::EmbeddingModel::untrained({4, 8, 3}, 12);
  tl::Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const auto u = random_vector(rng, 4, 3.0);
    const auto v = random_vector(rng, 4, 3.0);
    EXPECT_NEAR(tl::pair_probability(m, u, v) + tl::pair_probability(m, v, u), 1.0, 1e-12);
  }
}

TEST(PairProbability, TinyModelByHand) {
  tl::EmbeddingModel m;
  m.params.layers.push_back({2, 1, {0.5, -1.0}, {0.25}});
  m.params.beta = {2.0};
  m.norm_mean = {1.0, 0.0};
  m.norm_std = {2.0, 1.0};
  const std::vector<double> u{3.0, 1.0}, v{-1.0, -2.0};
  const double su = 2.0 * (0.5 * (3.0 - 1.0) / 2.0 - 1.0 * 1.0 + 0.25);
  const double sv = 2.0 * (0.5 * (-1.0 - 1.0) / 2.0 - 1.0 * -2.0 + 0.25);
  EXPECT_NEAR(tl::pair_probability(m, u, v), 1.0 / (1.0 + std::exp(-(sv - su))), 1e-15);
  EXPECT_EQ(error_code_of([&] { tl::pair_probability(m, u, std::vector<double>{1.0}); }), Errc::DimensionMismatch);
  EXPECT_EQ(error_code_of([&] { tl::pair_probability(m, u, std::vector<double>{1.0, NAN}); }), Errc::NonFiniteInput);
}

TEST(SamplePairs, LengthTwoAllPairs) {
  tl::SequenceDataset ds;
  ds.feature_dim = 1;
  ds.sequences["A"] = {{"A", 0, {0.0}}, {"A", 1, {1.0}}};
  const auto pairs = tl::sample_pairs(ds, {1, tl::PairMode::AllPairs, 0});
  ASSERT_EQ(pairs.size(), 1u);
}

TEST(SamplePairs, ExhaustiveLabelsForFive) {
  tl::SequenceDataset ds;
  ds.feature_dim = 1;
  for (int i = 0; i < 5; ++i) ds.sequences["A"].push_back({"A", 10 * i + 3, {0.0}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pairs = tl::sample_pairs(ds, {1, tl::PairMode::AllPairs, seed});
    ASSERT_EQ(pairs.size(), 10u);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& p : pairs) {
      EXPECT_EQ(p.u.group, 0u);
      EXPECT_NE(p.u.index, p.v.index);
      EXPECT_EQ(p.label, p.u.index < p.v.index ? 1 : 0);
      seen.insert({std::min(p.u.index, p.v.index), std::max(p.u.index, p.v.index)});
    }
    EXPECT_EQ(seen.size(), 10u);
  }
}

TEST(SamplePairs, LabelBalance) {
  const auto ds = ramp_dataset(100, 20, 3);
  const auto pairs = tl::sample_pairs(ds, {100, tl::PairMode::Sampled, 8});
  ASSERT_EQ(pairs.size(), 10000u);
  double ones = 0;
  for (const auto& p : pairs) ones += p.label;
  EXPECT_NEAR(ones / 1e4, 0.5, 3.0 * 0.5 / 100.0);
}

TEST(SamplePairs, SampledModeDrawsDistinctPairsPerEpoch) {
  const auto ds = ramp_dataset(4, 12, 1);
  const tl::PairPolicy policy{30, tl::PairMode::Sampled, 5};
  const auto e0 = tl::sample_pairs(ds, policy, 0);
  ASSERT_EQ(e0.size(), 120u);
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> unique;
  for (const auto& p : e0) unique.insert({p.u.group, std::min(p.u.index, p.v.index), std::max(p.u.index, p.v.index)});
  EXPECT_EQ(unique.size(), 120u);
  EXPECT_EQ(tl::sample_pairs(ds, policy, 0), e0);
  EXPECT_NE(tl::sample_pairs(ds, policy, 1), e0);
  // More pairs requested than exist: every pair once.
  EXPECT_EQ(tl::sample_pairs(ds, {1000, tl::PairMode::Sampled, 5}).size(), 4u * 66u);
}

TEST(SamplePairs, Errors) {
  tl::SequenceDataset ds;
  ds.feature_dim = 1;
  ds.sequences["A"] = {{"A", 0, {0.0}}};
  EXPECT_EQ(error_code_of([&] { tl::sample_pairs(ds, {}); }), Errc::SequenceTooShort);
  const auto big = ramp_dataset(1, 1500, 0);
  EXPECT_EQ(error_code_of([&] { tl::sample_pairs(big, {1, tl::PairMode::AllPairs, 0}); }), Errc::InvalidConfig);
}

TEST(ComparablePairs, Examples) {
  tl::SurvivalDataset a;
  a.feature_dim = 1;
  a.records = {{"1", 1.0, 1, {0}}, {"2", 2.0, 0, {0}}};
  EXPECT_EQ(tl::comparable_pairs(a).size(), 1u);
  a.records = {{"1", 1.0, 0, {0}}, {"2", 2.0, 1, {0}}};
  EXPECT_TRUE(tl::comparable_pairs(a).empty());
  a.records = {{"1", 1.0, 1, {0}}, {"2", 2.0, 0, {0}}, {"3", 3.0, 1, {0}}};
  const auto pairs = tl::comparable_pairs(a);
  ASSERT_EQ(pairs.size(), 2u);
  std::set<std::pair<std::size_t, std::size_t>> got;
  for (const auto& p : pairs) got.insert({std::min(p.u.index, p.v.index), std::max(p.u.index, p.v.index)});
  EXPECT_EQ(got, (std::set<std::pair<std::size_t, std::size_t>>{{0, 1}, {0, 2}}));
  a.records = {{"1", 2.0, 1, {0}}, {"2", 2.0, 1, {0}}};
  EXPECT_TRUE(tl::comparable_pairs(a).empty());
}

TEST(ComparablePairs, LabelMarksTheShorterLifespan) {
  tl::SurvivalConfig cfg;
  cfg.n = 60;
  cfg.feature_dim = 2;
  const auto ds = tl::generate_survival(cfg).data;
  const auto pairs = tl::comparable_pairs(ds, 4);
  std::size_t expected = 0;
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    for (std::size_t j = 0; j < ds.records.size(); ++j)
      expected += ds.records[i].time < ds.records[j].time && ds.records[i].event == 1;
  EXPECT_EQ(pairs.size(), expected);
  double ones = 0;
  for (const auto& p : pairs) {
    const auto& u = ds.records[p.u.index];
    const auto& v = ds.records[p.v.index];
    EXPECT_EQ(p.label, v.time < u.time ? 1 : 0);
    ones += p.label;
  }
  EXPECT_GT(ones, 0.3 * static_cast<double>(pairs.size()));
  EXPECT_LT(ones, 0.7 * static_cast<double>(pairs.size()));
}

TEST(PairLoss, Values) {
  for (int c : {0, 1}) {
    EXPECT_NEAR(tl::pair_loss(0.5, c, tl::LossKind::Bce), 0.693147180559945, 1e-14);
    EXPECT_EQ(tl::pair_loss(0.5, c, tl::LossKind::L1), 0.5);
  }
  EXPECT_TRUE(std::isfinite(tl::pair_loss(0.0, 1, tl::LossKind::Bce)));
  EXPECT_TRUE(std::isfinite(tl::pair_loss(1.0, 0, tl::LossKind::Bce)));
  EXPECT_NEAR(tl::pair_loss(0.0, 1, tl::LossKind::Bce), -std::log(1e-12), 1e-9);
}

TEST(PairLoss, OneSidedFormOverBothOrientationsIsBce) {
  tl::Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform_open();
    const int c = rng.coin();
    // Ordered-pair form: -sum over (u,v), (v,u) of C_uv log p_uv.
    const double one_sided = -(c * std::log(p) + (1 - c) * std::log(1.0 - p));
    EXPECT_NEAR(tl::pair_loss(p, c, tl::LossKind::Bce), one_sided, 1e-10);
    EXPECT_NEAR(tl::pair_loss(p, c, tl::LossKind::Bce), tl::pair_loss(1.0 - p, 1 - c, tl::LossKind::Bce), 1e-10);
    EXPECT_NEAR(tl::pair_loss(p, c, tl::LossKind::L1), tl::pair_loss(1.0 - p, 1 - c, tl::LossKind::L1), 1e-15);
  }
}

TEST(PairLoss, LogitGradientMatchesFiniteDifference) {
  tl::Rng rng(7);
  for (auto kind : {tl::LossKind::Bce, tl::LossKind::L1}) {
    for (int i = 0; i < 200; ++i) {
      const double logit = rng.uniform(-6, 6);
      const int c = rng.coin();
      const double h = 1e-6;
      const double numeric =
          (tl::pair_loss(tl::sigmoid(logit + h), c, kind) - tl::pair_loss(tl::sigmoid(logit - h), c, kind)) / (2 * h);
      EXPECT_NEAR(tl::pair_loss_grad(tl::sigmoid(logit), c, kind), numeric, 1e-7);
    }
  }
}

TEST(PairLoss, ParameterGradientMatchesFiniteDifference) {
  tl::Rng rng(8);
  for (auto kind : {tl::LossKind::Bce, tl::LossKind::L1}) {
    for (int trial = 0; trial < 20; ++trial) {
      auto p = tl::init_params(std::vector<std::size_t>{3, 6, 4, 2}, rng.next_u64());
      for (auto& l : p.layers)
        for (auto& b : l.bias) b = rng.uniform(-0.5, 0.5);
      const auto xu = random_vector(rng, 3), xv = random_vector(rng, 3);
      const int label = rng.coin();
      const auto g = tl::pair_gradient(p, tl::Activation::Tanh, xu, xv, label, kind);
      std::vector<double> analytic;
      g.for_each_block([&](std::span<const double> b) { analytic.insert(analytic.end(), b.begin(), b.end()); });
      std::vector<double*> slots;
      p.for_each_block([&](std::span<double> b) {
        for (auto& v : b) slots.push_back(&v);
      });
      for (std::size_t i = 0; i < slots.size(); ++i) {
        const double saved = *slots[i];
        *slots[i] = saved + 1e-5;
        const double up = pair_objective(p, xu, xv, label, kind);
        *slots[i] = saved - 1e-5;
        const double down = pair_objective(p, xu, xv, label, kind);
        *slots[i] = saved;
        const double numeric = (up - down) / 2e-5;
        EXPECT_LT(std::abs(analytic[i] - numeric) / std::max(1e-6, std::abs(analytic[i]) + std::abs(numeric)), 1e-4);
      }
    }
  }
}

TEST(PairLoss, OrientationInvariantObjective) {
  const auto p = tl::init_params(std::vector<std::size_t>{2, 4, 2}, 3);
  tl::Rng rng(1);
  for (auto kind : {tl::LossKind::Bce, tl::LossKind::L1}) {
    double loss = 0.0, swapped = 0.0;
    for (int i = 0; i < 50; ++i) {
      const auto xu = random_vector(rng, 2), xv = random_vector(rng, 2);
      const int c = rng.coin();
      loss += pair_objective(p, xu, xv, c, kind);
      swapped += pair_objective(p, xv, xu, 1 - c, kind);
      const auto g = tl::pair_gradient(p, tl::Activation::Tanh, xu, xv, c, kind);
      const auto h = tl::pair_gradient(p, tl::Activation::Tanh, xv, xu, 1 - c, kind);
      std::vector<double> fg, fh;
      g.for_each_block([&](std::span<const double> b) { fg.insert(fg.end(), b.begin(), b.end()); });
      h.for_each_block([&](std::span<const double> b) { fh.insert(fh.end(), b.begin(), b.end()); });
      for (std::size_t k = 0; k < fg.size(); ++k) EXPECT_NEAR(fg[k], fh[k], 1e-12);
    }
    EXPECT_NEAR(loss, swapped, 1e-12);
  }
}

TEST(PairwiseAccuracy, Examples) {
  const auto ds = ramp_dataset(5, 8, 2);
  const auto pairs = tl::sample_pairs(ds, {1, tl::PairMode::AllPairs, 1});
  const auto features = tl::features_of(ds);

  auto flat = tl::EmbeddingModel::untrained({1, 3}, 1);
  std::fill(flat.params.beta.begin(), flat.params.beta.end(), 0.0);
  EXPECT_EQ(tl::pairwise_accuracy(flat, pairs, features), 0.5);

  tl::EmbeddingModel identity;
  identity.params.layers.push_back({1, 1, {1.0}, {0.0}});
  identity.params.beta = {1.0};
  identity.norm_mean = {0.0};
  identity.norm_std = {1.0};
  EXPECT_EQ(tl::pairwise_accuracy(identity, pairs, features), 1.0);
  EXPECT_EQ(error_code_of([&] { tl::pairwise_accuracy(identity, {}, features); }), Errc::EmptyPairList);

  const auto random_model = tl::EmbeddingModel::untrained({1, 4, 2}, 9);
  double correct = 0;
  for (const auto& p : pairs) {
    const double su = random_model.score(features(p.u)), sv = random_model.score(features(p.v));
    correct += sv == su ? 0.5 : ((sv > su) == (p.label == 1) ? 1.0 : 0.0);
  }
  EXPECT_EQ(tl::pairwise_accuracy(random_model, pairs, features), correct / static_cast<double>(pairs.size()));
}

TEST(Score, ConsistentWithPairProbability) {
  const auto m = tl::EmbeddingModel::untrained({3, 5, 2}, 6);
  tl::Rng rng(3);
  std::vector<std::vector<double>> xs;
  for (int i = 0; i < 20; ++i) xs.push_back(random_vector(rng, 3));
  const auto s = tl::score(m, xs);
  EXPECT_EQ(s, tl::score(m, xs));
  for (std::size_t i = 1; i < xs.size(); ++i)
    EXPECT_NEAR(tl::sigmoid(s[i] - s[i - 1]), tl::pair_probability(m, xs[i - 1], xs[i]), 1e-12);
  EXPECT_EQ(error_code_of([&] { tl::score(m, std::vector<std::vector<double>>{{1.0}}); }), Errc::DimensionMismatch);
}

TEST(Train, SeparableOneDimensionalTrend) {
  const auto ds = ramp_dataset(40, 10, 4);
  tl::TrainConfig cfg;
  cfg.layer_dims = {1, 1};
  cfg.epochs = 20;
  cfg.adam.lr = 0.05;
  const auto result = tl::train(ds, cfg);
  EXPECT_LE(result.history.epochs.size(), 20u);
  EXPECT_GE(result.history.epochs[result.history.best_epoch].val_accuracy, 0.99);
  // Score must increase with the trend.
  const auto scores = tl::score(result.model, ds);
  for (const auto& [id, s] : scores) EXPECT_EQ(tl::mann_kendall(s).normalized, 1.0);
}

TEST(Train, DeterministicAndHistoryShape) {
  const auto ds = ramp_dataset(10, 6, 5);
  tl::TrainConfig cfg;
  cfg.epochs = 6;
  cfg.early_stop_patience = 0;
  cfg.seed = 77;
  const auto a = tl::train(ds, cfg);
  const auto b = tl::train(ds, cfg);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.history.epochs.size(), 6u);
  cfg.seed = 78;
  EXPECT_NE(tl::train(ds, cfg).model, a.model);
}

TEST(Train, EarlyStopping) {
  const auto ds = ramp_dataset(20, 6, 5);
  tl::TrainConfig cfg;
  cfg.layer_dims = {1, 1};
  cfg.epochs = 200;
  cfg.adam.lr = 0.1;
  cfg.early_stop_patience = 3;
  const auto r = tl::train(ds, cfg);
  EXPECT_LT(r.history.epochs.size(), 200u);
  EXPECT_EQ(r.history.epochs.size(), r.history.best_epoch + 4);
}

TEST(Train, ConfigAndDataErrors) {
  const auto ds = ramp_dataset(5, 6, 5);
  tl::TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_EQ(error_code_of([&] { tl::train(ds, cfg); }), Errc::InvalidConfig);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_EQ(error_code_of([&] { tl::train(ds, cfg); }), Errc::InvalidConfig);
  cfg = {};
  cfg.validation_fraction = 1.0;
  EXPECT_EQ(error_code_of([&] { tl::train(ds, cfg); }), Errc::InvalidConfig);
  cfg = {};
  cfg.layer_dims = {3, 4};
  EXPECT_EQ(error_code_of([&] { tl::train(ds, cfg); }), Errc::DimensionMismatch);
  cfg = {};
  EXPECT_EQ(error_code_of([&] { tl::train(tl::SequenceDataset{}, cfg); }), Errc::EmptyDataset);
  tl::SurvivalDataset censored;
  censored.feature_dim = 1;
  for (int i = 0; i < 10; ++i) censored.records.push_back({std::to_string(i), 1.0 + i, 0, {0.1 * i}});
  EXPECT_EQ(error_code_of([&] { tl::train(censored, cfg); }), Errc::NoComparablePairs);
  EXPECT_EQ(error_code_of([&] { tl::train(tl::SurvivalDataset{}, cfg); }), Errc::EmptyDataset);
}

TEST(Train, DivergenceIsReported) {
  const auto ds = ramp_dataset(10, 10, 5);
  tl::TrainConfig cfg;
  cfg.activation = tl::Activation::Relu;
  cfg.layer_dims = {1, 8, 8, 4};
  cfg.adam.lr = 1e300;
  cfg.epochs = 5;
  EXPECT_EQ(error_code_of([&] { tl::train(ds, cfg); }), Errc::DivergedLoss);
}

TEST(Train, SurvivalScoresRankRisk) {
  tl::SurvivalConfig gen;
  gen.n = 400;
  gen.feature_dim = 4;
  gen.seed = 3;
  const auto data = tl::generate_survival(gen);
  tl::TrainConfig cfg;
  cfg.epochs = 10;
  cfg.seed = 2;
  const auto model = tl::train(data.data, cfg).model;
  std::vector<double> time;
  std::vector<int> event;
  for (const auto& r : data.data.records) {
    time.push_back(r.time);
    event.push_back(r.event);
  }
  const double oracle = tl::concordance_index(data.true_risk, time, event);
  const double ci = tl::concordance_index(tl::score(model, data.data), time, event);
  EXPECT_GT(ci, 0.7);
  EXPECT_GT(ci, oracle - 0.05);
}
