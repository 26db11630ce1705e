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

// Contrastive trend estimation.
//
// A network F and head beta give every sample a scalar score s(x) =
// beta . F(x). For a pair (u, v) the model predicts
//
//   P(v comes after u) = sigmoid(s(v) - s(u))
//
// and is trained on pairs whose order is known: time order inside a
// sequence, or lifespan order for comparable survival records. After
// training s(x) orders samples like the hidden monotone trend.
//
// Survival convention: a higher score means a later degradation stage, that
// is a shorter remaining lifespan. The score is therefore used directly as
// the risk in the concordance index.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trendlab/dataset.hpp"
#include "trendlab/error.hpp"
#include "trendlab/model.hpp"
#include "trendlab/neural.hpp"
#include "trendlab/random.hpp"

namespace trendlab {

/// A sample inside a dataset: `group` is the sequence position in map order
/// (always 0 for survival records), `index` the sample within it.
struct SampleRef {
  std::size_t group = 0;
  std::size_t index = 0;
  bool operator==(const SampleRef&) const = default;
};

/// label = 1 means v is later in the trend than u.
struct LabeledPair {
  SampleRef u;
  SampleRef v;
  int label = 0;
  bool operator==(const LabeledPair&) const = default;
};

enum class PairMode { AllPairs, Sampled };

inline PairMode parse_pair_mode(std::string_view s) {
  if (s == "all_pairs") return PairMode::AllPairs;
  if (s == "sampled") return PairMode::Sampled;
  throw Error(Errc::InvalidConfig, "unknown pair mode '" + std::string(s) + "'");
}
constexpr std::string_view to_string(PairMode m) { return m == PairMode::AllPairs ? "all_pairs" : "sampled"; }

struct PairPolicy {
  /// Sequence mode: pairs per sequence per epoch. Survival mode: comparable
  /// pairs drawn per training record per epoch.
  std::size_t pairs_per_sequence = 32;
  PairMode mode = PairMode::Sampled;
  std::uint64_t seed = 0;
};

enum class LossKind { Bce, L1 };

inline LossKind parse_loss(std::string_view s) {
  if (s == "bce") return LossKind::Bce;
  if (s == "l1") return LossKind::L1;
  throw Error(Errc::InvalidConfig, "unknown loss '" + std::string(s) + "'");
}
constexpr std::string_view to_string(LossKind k) { return k == LossKind::Bce ? "bce" : "l1"; }

struct TrainConfig {
  /// [d, h1, ..., d_e]. A leading 0 means "input width of the data".
  std::vector<std::size_t> layer_dims{0, 32, 16, 4};
  Activation activation = Activation::Tanh;
  LossKind loss = LossKind::Bce;
  std::size_t epochs = 40;
  std::size_t batch_size = 64;
  PairPolicy pairs;
  AdamConfig adam;
  double validation_fraction = 0.2;
  /// Epochs without validation improvement before stopping; 0 disables.
  std::size_t early_stop_patience = 10;
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs < 1) throw Error(Errc::InvalidConfig, "epochs must be >= 1");
    if (batch_size < 1) throw Error(Errc::InvalidConfig, "batch_size must be >= 1");
    if (pairs.pairs_per_sequence < 1) throw Error(Errc::InvalidConfig, "pairs_per_sequence must be >= 1");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
      throw Error(Errc::InvalidConfig, "validation_fraction must lie in [0, 1)");
    if (!(adam.lr > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) ||
        !(adam.eps > 0.0))
      throw Error(Errc::InvalidConfig, "invalid Adam hyperparameters");
    if (layer_dims.size() < 2) throw Error(Errc::EmptyLayerList, "layer_dims needs input and embedding widths");
    for (std::size_t k = 1; k < layer_dims.size(); ++k)
      if (layer_dims[k] == 0) throw Error(Errc::ZeroWidthLayer, "layer " + std::to_string(k) + " has width 0");
  }
};

struct EpochStats {
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  bool operator==(const EpochStats&) const = default;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;
  bool operator==(const TrainHistory&) const = default;
};

struct TrainResult {
  EmbeddingModel model;
  TrainHistory history;
};

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double pair_probability(const EmbeddingModel& model, std::span<const double> x_u, std::span<const double> x_v) {
  return sigmoid(model.score(x_v) - model.score(x_u));
}

constexpr double kProbabilityClamp = 1e-12;

inline double pair_loss(double p, int label, LossKind kind) {
  p = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  if (kind == LossKind::L1) return std::abs(static_cast<double>(label) - p);
  return label == 1 ? -std::log(p) : -std::log1p(-p);
}

/// d(pair_loss)/d(logit) where p = sigmoid(logit).
inline double pair_loss_grad(double p, int label, LossKind kind) {
  const double c = static_cast<double>(label);
  if (kind == LossKind::Bce) return p - c;
  const double sign = p > c ? 1.0 : (p < c ? -1.0 : 0.0);
  return sign * p * (1.0 - p);
}

/// Adds scale * d(pair_loss)/d(params) for one pair of (already normalized)
/// inputs to `grads` and returns p = sigmoid(s(x_v) - s(x_u)).
inline double accumulate_pair_gradient(const ParamSet& params, Activation act, std::span<const double> x_u,
                                       std::span<const double> x_v, int label, LossKind kind, double scale,
                                       ParamSet& grads, ForwardCache& cache_u, ForwardCache& cache_v,
                                       std::vector<double>& scratch) {
  const double su = forward_into(params, act, x_u, cache_u);
  const double sv = forward_into(params, act, x_v, cache_v);
  const double p = sigmoid(sv - su);
  const double g = pair_loss_grad(p, label, kind) * scale;
  accumulate_backward(params, act, cache_v, g, grads, scratch);
  accumulate_backward(params, act, cache_u, -g, grads, scratch);
  return p;
}

/// Gradient of pair_loss for one pair with respect to every parameter.
inline ParamSet pair_gradient(const ParamSet& params, Activation act, std::span<const double> x_u,
                              std::span<const double> x_v, int label, LossKind kind) {
  ParamSet grads = params.zeros_like();
  ForwardCache cu, cv;
  std::vector<double> scratch;
  accumulate_pair_gradient(params, act, x_u, x_v, label, kind, 1.0, grads, cu, cv, scratch);
  return grads;
}

namespace detail {

inline std::size_t pair_count(std::size_t n) { return n * (n - 1) / 2; }

// Unordered pair number k in [0, n(n-1)/2) -> (i, j), i < j.
inline std::pair<std::size_t, std::size_t> decode_pair(std::uint64_t k, std::size_t n) {
  std::size_t i = 0;
  std::uint64_t row = n - 1;
  while (k >= row) {
    k -= row;
    ++i;
    --row;
  }
  return {i, i + 1 + static_cast<std::size_t>(k)};
}

}  // namespace detail

/// Within-sequence training pairs for one epoch. Each unordered pair {i, j}
/// is oriented by a fair coin; label = 1 iff t_u < t_v. Sampled mode draws
/// P distinct unordered pairs per sequence (all of them if fewer exist).
inline std::vector<LabeledPair> sample_pairs(const SequenceDataset& ds, const PairPolicy& policy,
                                             std::uint64_t epoch = 0) {
  if (policy.pairs_per_sequence < 1) throw Error(Errc::InvalidConfig, "pairs_per_sequence must be >= 1");
  std::uint64_t total = 0;
  for (const auto& [id, seq] : ds.sequences) {
    if (seq.size() < 2) throw Error(Errc::SequenceTooShort, "sequence '" + id + "' has fewer than 2 samples");
    total += detail::pair_count(seq.size());
  }
  if (policy.mode == PairMode::AllPairs && total > 1'000'000)
    throw Error(Errc::InvalidConfig, "all_pairs would produce " + std::to_string(total) + " pairs (limit 10^6)");

  Rng rng(derive_seed(policy.seed, epoch));
  std::vector<LabeledPair> pairs;
  std::size_t group = 0;
  for (const auto& [id, seq] : ds.sequences) {
    const std::size_t n = seq.size();
    auto emit = [&](std::size_t i, std::size_t j) {
      LabeledPair p;
      if (rng.coin()) std::swap(i, j);
      p.u = {group, i};
      p.v = {group, j};
      p.label = seq[i].t < seq[j].t ? 1 : 0;
      pairs.push_back(p);
    };
    if (policy.mode == PairMode::AllPairs) {
      for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) emit(i, j);
    } else {
      for (auto k : rng.distinct(detail::pair_count(n), policy.pairs_per_sequence)) {
        auto [i, j] = detail::decode_pair(k, n);
        emit(i, j);
      }
    }
    ++group;
  }
  return pairs;
}

/// Survival pairs whose lifespan order is known: times differ and the
/// shorter one is an observed event. Orientation by fair coin; label = 1 iff
/// v has the shorter lifespan (v is closer to failure).
inline std::vector<LabeledPair> comparable_pairs(const SurvivalDataset& ds, std::uint64_t seed = 0) {
  Rng rng(seed);
  std::vector<LabeledPair> pairs;
  const auto& r = ds.records;
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = i + 1; j < r.size(); ++j) {
      if (r[i].time == r[j].time) continue;
      const std::size_t shorter = r[i].time < r[j].time ? i : j;
      if (r[shorter].event != 1) continue;
      std::size_t u = i, v = j;
      if (rng.coin()) std::swap(u, v);
      pairs.push_back({{0, u}, {0, v}, v == shorter ? 1 : 0});
    }
  }
  return pairs;
}

using FeatureAccessor = std::function<std::span<const double>(SampleRef)>;

inline FeatureAccessor features_of(const SequenceDataset& ds) {
  std::vector<const std::vector<Sample>*> groups;
  for (const auto& [id, seq] : ds.sequences) groups.push_back(&seq);
  return [groups = std::move(groups)](SampleRef r) -> std::span<const double> {
    return (*groups.at(r.group)).at(r.index).features;
  };
}

inline FeatureAccessor features_of(const SurvivalDataset& ds) {
  return [&ds](SampleRef r) -> std::span<const double> { return ds.records.at(r.index).features; };
}

/// Fraction of pairs where (p > 0.5) agrees with label = 1; p == 0.5 earns half.
inline double pairwise_accuracy(const EmbeddingModel& model, std::span<const LabeledPair> pairs,
                                const FeatureAccessor& features) {
  if (pairs.empty()) throw Error(Errc::EmptyPairList, "no pairs to evaluate");
  double correct = 0.0;
  for (const auto& pair : pairs) {
    const double p = pair_probability(model, features(pair.u), features(pair.v));
    if (p == 0.5)
      correct += 0.5;
    else if ((p > 0.5) == (pair.label == 1))
      correct += 1.0;
  }
  return correct / static_cast<double>(pairs.size());
}

inline std::vector<double> score(const EmbeddingModel& model, std::span<const std::vector<double>> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  ForwardCache cache;
  std::vector<double> x;
  for (const auto& s : samples) {
    model.normalize_into(s, x);
    out.push_back(forward_into(model.params, model.activation, x, cache));
  }
  return out;
}

/// Scores of every sample, keyed like the dataset.
inline std::map<std::string, std::vector<double>> score(const EmbeddingModel& model, const SequenceDataset& ds) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& [id, seq] : ds.sequences) {
    std::vector<std::vector<double>> xs;
    xs.reserve(seq.size());
    for (const auto& s : seq) xs.push_back(s.features);
    out[id] = score(model, xs);
  }
  return out;
}

inline std::vector<double> score(const EmbeddingModel& model, const SurvivalDataset& ds) {
  std::vector<std::vector<double>> xs;
  xs.reserve(ds.records.size());
  for (const auto& r : ds.records) xs.push_back(r.features);
  return score(model, xs);
}

namespace detail {

// Training view: normalized features of a group of samples plus the pairs
// over them. Pair refs index `rows` through `offsets`.
struct PairTable {
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> offsets;  // first row of each group
  std::vector<LabeledPair> pairs;

  std::size_t row(SampleRef r) const { return offsets[r.group] + r.index; }
};

inline void feature_stats(const std::vector<const std::vector<double>*>& rows, std::size_t d,
                          std::vector<double>& mean, std::vector<double>& sd) {
  mean.assign(d, 0.0);
  sd.assign(d, 0.0);
  if (rows.empty()) {
    sd.assign(d, 1.0);
    return;
  }
  const double n = static_cast<double>(rows.size());
  for (const auto* r : rows)
    for (std::size_t c = 0; c < d; ++c) mean[c] += (*r)[c];
  for (auto& m : mean) m /= n;
  for (const auto* r : rows)
    for (std::size_t c = 0; c < d; ++c) {
      const double dv = (*r)[c] - mean[c];
      sd[c] += dv * dv;
    }
  for (auto& s : sd) s = std::max(std::sqrt(s / n), 1e-8);
}

inline double accuracy_from_scores(const PairTable& table, const std::vector<double>& scores) {
  double correct = 0.0;
  for (const auto& pair : table.pairs) {
    const double p = sigmoid(scores[table.row(pair.v)] - scores[table.row(pair.u)]);
    if (p == 0.5)
      correct += 0.5;
    else if ((p > 0.5) == (pair.label == 1))
      correct += 1.0;
  }
  return correct / static_cast<double>(table.pairs.size());
}

/// The shared optimization loop. `next_pairs(epoch)` supplies the training
/// pairs of each epoch (refs into `train.rows`).
inline TrainResult fit(EmbeddingModel model, PairTable& train, const PairTable& val,
                       const std::function<std::vector<LabeledPair>(std::uint64_t)>& next_pairs,
                       const TrainConfig& config) {
  AdamState adam = AdamState::for_params(model.params, config.adam);
  ParamSet grads = model.params.zeros_like();
  ForwardCache cache_u, cache_v;
  std::vector<double> scratch;

  TrainResult best{model, {}};
  double best_acc = -1.0;
  std::size_t since_best = 0;

  for (std::uint64_t epoch = 0; epoch < config.epochs; ++epoch) {
    train.pairs = next_pairs(epoch);
    if (train.pairs.empty()) throw Error(Errc::NoComparablePairs, "no training pairs in epoch " + std::to_string(epoch));
    Rng order_rng(derive_seed(config.seed, 0x0b5e55ed, epoch));
    order_rng.shuffle(std::span<LabeledPair>(train.pairs));

    double loss_sum = 0.0;
    double correct = 0.0;
    for (std::size_t start = 0; start < train.pairs.size(); start += config.batch_size) {
      const std::size_t end = std::min(train.pairs.size(), start + config.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      grads.for_each_block([](std::span<double> b) { std::fill(b.begin(), b.end(), 0.0); });
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const LabeledPair& pair = train.pairs[k];
        const double p = accumulate_pair_gradient(model.params, model.activation, train.rows[train.row(pair.u)],
                                                  train.rows[train.row(pair.v)], pair.label, config.loss, inv_batch,
                                                  grads, cache_u, cache_v, scratch);
        batch_loss += pair_loss(p, pair.label, config.loss);
        if (p == 0.5)
          correct += 0.5;
        else if ((p > 0.5) == (pair.label == 1))
          correct += 1.0;
      }
      if (!std::isfinite(batch_loss))
        throw Error(Errc::DivergedLoss, "non-finite loss in epoch " + std::to_string(epoch) + " at pair " +
                                            std::to_string(start) + "; try a smaller learning rate");
      loss_sum += batch_loss;
      adam_step(adam, model.params, grads);
    }

    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(train.pairs.size());
    if (!val.pairs.empty()) {
      std::vector<double> scores;
      scores.reserve(val.rows.size());
      for (const auto& x : val.rows) scores.push_back(forward_into(model.params, model.activation, x, cache_u));
      stats.val_accuracy = accuracy_from_scores(val, scores);
    } else {
      stats.val_accuracy = correct / static_cast<double>(train.pairs.size());
    }
    best.history.epochs.push_back(stats);

    if (stats.val_accuracy > best_acc || val.pairs.empty()) {
      best_acc = stats.val_accuracy;
      best.model = model;
      best.history.best_epoch = epoch;
      since_best = 0;
    } else if (config.early_stop_patience > 0 && ++since_best >= config.early_stop_patience) {
      break;
    }
  }
  return best;
}

inline EmbeddingModel initial_model(const TrainConfig& config, std::size_t input_dim) {
  auto dims = config.layer_dims;
  if (dims.front() == 0) dims.front() = input_dim;
  if (dims.front() != input_dim)
    throw Error(Errc::DimensionMismatch, "layer_dims starts with " + std::to_string(dims.front()) +
                                             " but the data has " + std::to_string(input_dim) + " features");
  return EmbeddingModel::untrained(dims, derive_seed(config.seed, 0x1a7e), config.activation);
}

inline std::size_t validation_count(std::size_t n, double fraction) {
  if (fraction <= 0.0 || n < 2) return 0;
  auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

}  // namespace detail

/// Trains on within-sequence time order. Validation holds out whole
/// sequences. Returns the model of the best validation epoch.
inline TrainResult train(const SequenceDataset& data, const TrainConfig& config) {
  config.validate();
  if (data.sequences.empty()) throw Error(Errc::EmptyDataset, "no sequences to train on");
  if (data.sequences.size() < 2) throw Error(Errc::EmptyDataset, "training needs at least 2 sequences");
  for (const auto& [id, seq] : data.sequences)
    if (seq.size() < 2) throw Error(Errc::SequenceTooShort, "sequence '" + id + "' has fewer than 2 samples");

  std::vector<std::string> ids;
  for (const auto& [id, seq] : data.sequences) ids.push_back(id);
  Rng split_rng(derive_seed(config.seed, 0x5b17));
  split_rng.shuffle(std::span<std::string>(ids));
  const std::size_t n_val = detail::validation_count(ids.size(), config.validation_fraction);

  SequenceDataset train_ds, val_ds;
  train_ds.feature_dim = val_ds.feature_dim = data.feature_dim;
  for (std::size_t k = 0; k < ids.size(); ++k)
    (k < n_val ? val_ds : train_ds).sequences[ids[k]] = data.sequences.at(ids[k]);

  EmbeddingModel model = detail::initial_model(config, data.feature_dim);
  std::vector<const std::vector<double>*> raw;
  for (const auto& [id, seq] : train_ds.sequences)
    for (const auto& s : seq) raw.push_back(&s.features);
  detail::feature_stats(raw, data.feature_dim, model.norm_mean, model.norm_std);

  auto build = [&](const SequenceDataset& ds) {
    detail::PairTable table;
    for (const auto& [id, seq] : ds.sequences) {
      table.offsets.push_back(table.rows.size());
      for (const auto& s : seq) table.rows.push_back(model.normalize(s.features));
    }
    return table;
  };
  detail::PairTable train_table = build(train_ds);
  detail::PairTable val_table = build(val_ds);
  if (!val_ds.sequences.empty()) {
    PairPolicy val_policy = config.pairs;
    val_policy.seed = derive_seed(config.seed, 0x7a1);
    std::uint64_t total = 0;
    for (const auto& [id, seq] : val_ds.sequences) total += detail::pair_count(seq.size());
    val_policy.mode = total <= 200'000 ? PairMode::AllPairs : PairMode::Sampled;
    val_table.pairs = sample_pairs(val_ds, val_policy);
  }

  PairPolicy policy = config.pairs;
  policy.seed = derive_seed(config.pairs.seed, config.seed);
  auto next_pairs = [&](std::uint64_t epoch) { return sample_pairs(train_ds, policy, epoch); };
  return detail::fit(std::move(model), train_table, val_table, next_pairs, config);
}

/// Trains on lifespan order of comparable survival pairs (records split into
/// train and validation). Higher score = shorter lifespan.
inline TrainResult train(const SurvivalDataset& data, const TrainConfig& config) {
  config.validate();
  if (data.records.empty()) throw Error(Errc::EmptyDataset, "no survival records to train on");

  std::vector<std::size_t> order(data.records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng split_rng(derive_seed(config.seed, 0x5b17));
  split_rng.shuffle(std::span<std::size_t>(order));
  const std::size_t n_val = detail::validation_count(order.size(), config.validation_fraction);

  SurvivalDataset train_ds, val_ds;
  train_ds.feature_dim = val_ds.feature_dim = data.feature_dim;
  for (std::size_t k = 0; k < order.size(); ++k)
    (k < n_val ? val_ds : train_ds).records.push_back(data.records[order[k]]);

  const auto all_train_pairs = comparable_pairs(train_ds, derive_seed(config.seed, 0xc0));
  if (all_train_pairs.empty()) throw Error(Errc::NoComparablePairs, "training records contain no comparable pair");

  EmbeddingModel model = detail::initial_model(config, data.feature_dim);
  std::vector<const std::vector<double>*> raw;
  for (const auto& r : train_ds.records) raw.push_back(&r.features);
  detail::feature_stats(raw, data.feature_dim, model.norm_mean, model.norm_std);

  auto build = [&](const SurvivalDataset& ds) {
    detail::PairTable table;
    table.offsets.push_back(0);
    for (const auto& r : ds.records) table.rows.push_back(model.normalize(r.features));
    return table;
  };
  detail::PairTable train_table = build(train_ds);
  detail::PairTable val_table = build(val_ds);
  if (!val_ds.records.empty()) {
    auto val_pairs = comparable_pairs(val_ds, derive_seed(config.seed, 0x7a1));
    constexpr std::size_t kMaxValPairs = 200'000;
    if (val_pairs.size() > kMaxValPairs) {
      Rng pick(derive_seed(config.seed, 0x7a2));
      std::vector<LabeledPair> kept;
      for (auto k : pick.distinct(val_pairs.size(), kMaxValPairs)) kept.push_back(val_pairs[k]);
      val_pairs = std::move(kept);
    }
    val_table.pairs = std::move(val_pairs);
  }

  const std::size_t per_epoch = config.pairs.mode == PairMode::AllPairs
                                    ? all_train_pairs.size()
                                    : std::min(all_train_pairs.size(),
                                               config.pairs.pairs_per_sequence * train_ds.records.size());
  auto next_pairs = [&](std::uint64_t epoch) {
    Rng rng(derive_seed(config.pairs.seed, config.seed, epoch));
    std::vector<LabeledPair> pairs;
    pairs.reserve(per_epoch);
    auto take = [&](LabeledPair p) {
      if (rng.coin()) {
        std::swap(p.u, p.v);
        p.label = 1 - p.label;
      }
      pairs.push_back(p);
    };
    if (per_epoch == all_train_pairs.size()) {
      for (const auto& p : all_train_pairs) take(p);
    } else {
      for (auto k : rng.distinct(all_train_pairs.size(), per_epoch)) take(all_train_pairs[k]);
    }
    return pairs;
  };
  return detail::fit(std::move(model), train_table, val_table, next_pairs, config);
}

}  // namespace trendlab
