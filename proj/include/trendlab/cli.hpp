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

// `trendlab` command-line front end. Lives in a header so tests can drive
// dispatch() in-process. Requires CLI11.hpp and json.hpp on the include path.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "trendlab/cte.hpp"
#include "trendlab/dataset.hpp"
#include "trendlab/error.hpp"
#include "trendlab/model.hpp"
#include "trendlab/stats.hpp"
#include "trendlab/synth.hpp"

namespace trendlab::cli {

using nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

/// Structured record of one run: effective configuration, metrics and the
/// files produced. Written as JSON.
struct RunReport {
  std::string command;
  ordered_json config = ordered_json::object();
  std::uint64_t seed = 0;
  ordered_json metrics = ordered_json::object();
  ordered_json artifacts = ordered_json::object();
  double wall_time_seconds = 0.0;

  ordered_json to_json() const {
    ordered_json j;
    j["command"] = command;
    j["config"] = config;
    j["seed"] = seed;
    j["metrics"] = metrics;
    j["wall_time_seconds"] = wall_time_seconds;
    j["artifacts"] = artifacts;
    return j;
  }
};

// ---------------------------------------------------------------------------
// Training configuration files: `key = value` lines, '#' comments.

inline std::vector<std::size_t> parse_dims(std::string_view text) {
  std::vector<std::size_t> dims;
  for (auto tok : detail::tokens(text)) {
    auto v = detail::parse_integer(tok);
    if (!v || *v < 0) throw Error(Errc::InvalidConfig, "bad layer width '" + std::string(tok) + "'");
    dims.push_back(static_cast<std::size_t>(*v));
  }
  return dims;
}

inline void apply_setting(TrainConfig& c, const std::string& key, const std::string& value) {
  auto real = [&] {
    auto v = detail::parse_real(value);
    if (!v || !std::isfinite(*v)) throw Error(Errc::InvalidConfig, "'" + key + "' expects a number, got '" + value + "'");
    return *v;
  };
  auto count = [&] {
    auto v = detail::parse_integer(value);
    if (!v || *v < 0) throw Error(Errc::InvalidConfig, "'" + key + "' expects a non-negative integer, got '" + value + "'");
    return static_cast<std::size_t>(*v);
  };
  if (key == "layer_dims") c.layer_dims = parse_dims(value);
  else if (key == "activation") c.activation = parse_activation(value);
  else if (key == "loss") c.loss = parse_loss(value);
  else if (key == "epochs") c.epochs = count();
  else if (key == "batch_size") c.batch_size = count();
  else if (key == "pairs_per_sequence") c.pairs.pairs_per_sequence = count();
  else if (key == "pair_mode") c.pairs.mode = parse_pair_mode(value);
  else if (key == "pair_seed") c.pairs.seed = count();
  else if (key == "lr") c.adam.lr = real();
  else if (key == "beta1") c.adam.beta1 = real();
  else if (key == "beta2") c.adam.beta2 = real();
  else if (key == "eps") c.adam.eps = real();
  else if (key == "validation_fraction") c.validation_fraction = real();
  else if (key == "early_stop_patience") c.early_stop_patience = count();
  else if (key == "seed") c.seed = count();
  else throw Error(Errc::InvalidConfig, "unknown config key '" + key + "'");
}

inline void load_config_file(TrainConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open config '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw Error(Errc::InvalidConfig, path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    apply_setting(c, std::string(detail::trim(body.substr(0, eq))), std::string(detail::trim(body.substr(eq + 1))));
  }
}

inline ordered_json config_to_json(const TrainConfig& c) {
  ordered_json j;
  j["layer_dims"] = c.layer_dims;
  j["activation"] = to_string(c.activation);
  j["loss"] = to_string(c.loss);
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["pairs_per_sequence"] = c.pairs.pairs_per_sequence;
  j["pair_mode"] = to_string(c.pairs.mode);
  j["pair_seed"] = c.pairs.seed;
  j["lr"] = c.adam.lr;
  j["beta1"] = c.adam.beta1;
  j["beta2"] = c.adam.beta2;
  j["eps"] = c.adam.eps;
  j["validation_fraction"] = c.validation_fraction;
  j["early_stop_patience"] = c.early_stop_patience;
  j["seed"] = c.seed;
  return j;
}

// ---------------------------------------------------------------------------
// Evaluation helpers shared by eval-trend, noise-bench and the tests.

struct TrendEvaluation {
  double spearman_abs = 0.0;  ///< mean over sequences of |Spearman(score, tau)|
  double pearson_abs = 0.0;
  double spearman_abs_pooled = 0.0;
  double pearson_abs_pooled = 0.0;
  std::size_t sequences_correlated = 0;
  std::size_t sequences_skipped = 0;  ///< constant trend or constant score
  double pairwise_accuracy = 0.0;     ///< over all within-sequence pairs, labels from t
  double mk_S_mean = 0.0;
  double mk_normalized_mean = 0.0;
  double mk_p_median = 1.0;
  double mk_significant_fraction = 0.0;
};

/// All within-sequence pairs labelled by time order, u before v.
inline std::vector<LabeledPair> ordered_pairs(const SequenceDataset& ds) {
  std::vector<LabeledPair> pairs;
  std::size_t g = 0;
  for (const auto& [id, seq] : ds.sequences) {
    for (std::size_t i = 0; i < seq.size(); ++i)
      for (std::size_t j = i + 1; j < seq.size(); ++j) pairs.push_back({{g, i}, {g, j}, 1});
    ++g;
  }
  return pairs;
}

/// Accuracy of score order against time order over all within-sequence
/// pairs, computed from precomputed scores (same predicate as
/// pairwise_accuracy).
inline double clean_pair_accuracy(const SequenceDataset& ds, const std::map<std::string, std::vector<double>>& scores) {
  double correct = 0.0;
  std::size_t total = 0;
  for (const auto& [id, seq] : ds.sequences) {
    const auto& s = scores.at(id);
    for (std::size_t i = 0; i < seq.size(); ++i)
      for (std::size_t j = i + 1; j < seq.size(); ++j) {
        const double p = sigmoid(s[j] - s[i]);
        const bool later = seq[i].t < seq[j].t;
        if (p == 0.5)
          correct += 0.5;
        else if ((p > 0.5) == later)
          correct += 1.0;
        ++total;
      }
  }
  if (total == 0) throw Error(Errc::EmptyPairList, "no pairs to evaluate");
  return correct / static_cast<double>(total);
}

inline TrendEvaluation evaluate_trend(const SequenceDataset& ds, const std::map<std::string, std::vector<double>>& scores) {
  TrendEvaluation ev;
  std::vector<double> pooled_scores, pooled_tau, mk_p;
  std::size_t significant = 0;
  for (const auto& [id, seq] : ds.sequences) {
    const auto& s = scores.at(id);
    if (s.size() >= 3) {
      const auto mk = mann_kendall(s);
      ev.mk_S_mean += static_cast<double>(mk.S);
      ev.mk_normalized_mean += mk.normalized;
      mk_p.push_back(mk.p_two_sided);
      significant += mk.significant();
    }
    if (!ds.trend_truth) continue;
    const auto& tau = ds.trend_truth->at(id);
    pooled_scores.insert(pooled_scores.end(), s.begin(), s.end());
    pooled_tau.insert(pooled_tau.end(), tau.begin(), tau.end());
    try {
      ev.spearman_abs += std::abs(rank_correlation(s, tau, CorrelationKind::Spearman));
      ev.pearson_abs += std::abs(rank_correlation(s, tau, CorrelationKind::Pearson));
      ++ev.sequences_correlated;
    } catch (const Error& e) {
      if (e.code() != Errc::ConstantVector) throw;
      ++ev.sequences_skipped;
    }
  }
  if (ev.sequences_correlated > 0) {
    ev.spearman_abs /= static_cast<double>(ev.sequences_correlated);
    ev.pearson_abs /= static_cast<double>(ev.sequences_correlated);
  }
  if (!pooled_tau.empty()) {
    try {
      ev.spearman_abs_pooled = std::abs(rank_correlation(pooled_scores, pooled_tau, CorrelationKind::Spearman));
      ev.pearson_abs_pooled = std::abs(rank_correlation(pooled_scores, pooled_tau, CorrelationKind::Pearson));
    } catch (const Error& e) {
      if (e.code() != Errc::ConstantVector) throw;
    }
  }
  if (!mk_p.empty()) {
    const double n = static_cast<double>(mk_p.size());
    ev.mk_S_mean /= n;
    ev.mk_normalized_mean /= n;
    ev.mk_significant_fraction = static_cast<double>(significant) / n;
    std::sort(mk_p.begin(), mk_p.end());
    const std::size_t m = mk_p.size();
    ev.mk_p_median = m % 2 ? mk_p[m / 2] : 0.5 * (mk_p[m / 2 - 1] + mk_p[m / 2]);
  }
  ev.pairwise_accuracy = clean_pair_accuracy(ds, scores);
  return ev;
}

/// Harrell's C with the score as risk (higher score = closer to failure).
inline double survival_concordance(const SurvivalDataset& ds, std::span<const double> risk) {
  std::vector<double> time;
  std::vector<int> event;
  for (const auto& r : ds.records) {
    time.push_back(r.time);
    event.push_back(r.event);
  }
  return concordance_index(risk, time, event);
}

// ---------------------------------------------------------------------------

namespace detail {

inline void emit_report(RunReport& report, const std::string& path, std::ostream& out,
                        std::chrono::steady_clock::time_point start) {
  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string text = report.to_json().dump(2) + "\n";
  if (path.empty() || path == "-") {
    out << text;
  } else {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(Errc::Io, "cannot write report '" + path + "'");
    f << text;
  }
}

struct NoiseCell {
  double eta;
  std::size_t M;
};

inline std::vector<NoiseCell> parse_grid(const std::string& text) {
  std::vector<NoiseCell> grid;
  for (auto item : trendlab::detail::split(text, ',')) {
    item = trendlab::detail::trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) throw Error(Errc::InvalidConfig, "grid entries look like eta:M");
    auto eta = trendlab::detail::parse_real(item.substr(0, colon));
    auto m = trendlab::detail::parse_integer(item.substr(colon + 1));
    if (!eta || !m || *m < 1) throw Error(Errc::InvalidConfig, "bad grid entry '" + std::string(item) + "'");
    grid.push_back({*eta, static_cast<std::size_t>(*m)});
  }
  if (grid.empty()) throw Error(Errc::InvalidConfig, "empty noise grid");
  return grid;
}

}  // namespace detail

/// Runs one command line (without the program name). Reports go to `out`
/// unless --report names a file; diagnostics go to `err`.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"trendlab: contrastive trend estimation toolkit", "trendlab"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  RunReport report;
  std::string report_path;
  std::function<void()> action;

  auto add_report = [&](CLI::App* sub) {
    sub->add_option("--report", report_path, "Write the JSON run report here (default stdout)");
  };

  // gen-springs ------------------------------------------------------------
  SpringsConfig springs;
  std::string springs_out;
  auto* gen_springs = app.add_subcommand("gen-springs", "Simulate ageing ball-spring sequences");
  gen_springs->add_option("--out", springs_out, "Output sequence CSV")->required();
  gen_springs->add_option("--sequences", springs.n_sequences, "Number of sequences")->capture_default_str();
  gen_springs->add_option("--samples", springs.samples_per_sequence, "Samples per sequence")->capture_default_str();
  gen_springs->add_option("--balls", springs.n_balls, "Balls per system")->capture_default_str();
  gen_springs->add_option("--space-dim", springs.space_dim, "Spatial dimension")->capture_default_str();
  gen_springs->add_option("--sim-steps", springs.sim_steps, "Recorded frames per sample")->capture_default_str();
  gen_springs->add_option("--dt", springs.dt, "Integrator step")->capture_default_str();
  gen_springs->add_option("--connection-prob", springs.connection_prob, "Spring probability per ball pair")->capture_default_str();
  gen_springs->add_option("--rigidity", springs.base_rigidity, "Initial spring rigidity")->capture_default_str();
  gen_springs->add_option("--rest-length", springs.rest_length, "Spring rest length")->capture_default_str();
  gen_springs->add_option("--alpha-min", springs.alpha_min, "Lower bound of the ageing factor")->capture_default_str();
  gen_springs->add_option("--alpha-max", springs.alpha_max, "Upper bound of the ageing factor")->capture_default_str();
  gen_springs->add_option("--seed", springs.seed, "Random seed")->capture_default_str();
  add_report(gen_springs);
  gen_springs->callback([&] {
    action = [&] {
      auto gen = simulate_ball_springs(springs);
      write_sequence_dataset(gen.data, springs_out);
      const auto meta_path = sidecar_path(springs_out);
      write_sidecar(gen.meta, meta_path);
      report.seed = springs.seed;
      report.config = {{"sequences", springs.n_sequences}, {"samples", springs.samples_per_sequence},
                       {"balls", springs.n_balls}, {"space_dim", springs.space_dim},
                       {"sim_steps", springs.sim_steps}, {"dt", springs.dt},
                       {"connection_prob", springs.connection_prob}, {"rigidity", springs.base_rigidity},
                       {"rest_length", springs.rest_length}, {"alpha_min", springs.alpha_min},
                       {"alpha_max", springs.alpha_max}, {"seed", springs.seed}};
      double alpha_mean = 0.0;
      for (const auto& row : gen.meta.rows) alpha_mean += row.second;
      report.metrics["n_sequences"] = gen.data.sequences.size();
      report.metrics["n_samples"] = gen.data.sample_count();
      report.metrics["feature_dim"] = gen.data.feature_dim;
      report.metrics["alpha_mean"] = alpha_mean / static_cast<double>(gen.meta.rows.size());
      report.artifacts = {{"data", springs_out}, {"meta", meta_path}};
    };
  });

  // gen-mixture ------------------------------------------------------------
  MixtureConfig mixture;
  std::string mixture_out, transform_name = "identity", mixing_name = "random";
  auto* gen_mixture = app.add_subcommand("gen-mixture", "Generate monotone-trend mixture sequences");
  gen_mixture->add_option("--out", mixture_out, "Output sequence CSV")->required();
  gen_mixture->add_option("--sequences", mixture.n_sequences, "Number of sequences")->capture_default_str();
  gen_mixture->add_option("--samples", mixture.samples_per_sequence, "Samples per sequence")->capture_default_str();
  gen_mixture->add_option("--nuisance-dim", mixture.nuisance_dim, "Nuisance factors")->capture_default_str();
  gen_mixture->add_option("--transform", transform_name, "Trend transform: identity|cube|exp")->capture_default_str();
  gen_mixture->add_option("--mixing", mixing_name, "Mixing map: random|identity")->capture_default_str();
  gen_mixture->add_option("--noise-std", mixture.noise_std, "Additive observation noise")->capture_default_str();
  gen_mixture->add_option("--seed", mixture.seed, "Random seed")->capture_default_str();
  add_report(gen_mixture);
  gen_mixture->callback([&] {
    action = [&] {
      mixture.trend_transform = parse_trend_transform(transform_name);
      mixture.mixing = parse_mixing(mixing_name);
      auto gen = generate_monotone_mixture(mixture);
      write_sequence_dataset(gen.data, mixture_out);
      const auto meta_path = sidecar_path(mixture_out);
      write_sidecar(gen.meta, meta_path);
      report.seed = mixture.seed;
      report.config = {{"sequences", mixture.n_sequences}, {"samples", mixture.samples_per_sequence},
                       {"nuisance_dim", mixture.nuisance_dim}, {"transform", transform_name},
                       {"mixing", mixing_name}, {"noise_std", mixture.noise_std}, {"seed", mixture.seed}};
      report.metrics["n_sequences"] = gen.data.sequences.size();
      report.metrics["n_samples"] = gen.data.sample_count();
      report.metrics["feature_dim"] = gen.data.feature_dim;
      report.artifacts = {{"data", mixture_out}, {"meta", meta_path}};
    };
  });

  // gen-survival -----------------------------------------------------------
  SurvivalConfig survival;
  std::string survival_out;
  auto* gen_survival = app.add_subcommand("gen-survival", "Generate censored survival records");
  gen_survival->add_option("--out", survival_out, "Output survival CSV")->required();
  gen_survival->add_option("--n", survival.n, "Number of records")->capture_default_str();
  gen_survival->add_option("--dim", survival.feature_dim, "Feature dimension")->capture_default_str();
  gen_survival->add_option("--censor-rate", survival.censor_rate, "Target censored fraction")->capture_default_str();
  gen_survival->add_option("--risk-scale", survival.risk_scale, "Norm of the true log-hazard coefficients")->capture_default_str();
  gen_survival->add_option("--seed", survival.seed, "Random seed")->capture_default_str();
  add_report(gen_survival);
  gen_survival->callback([&] {
    action = [&] {
      auto gen = generate_survival(survival);
      write_survival_dataset(gen.data, survival_out);
      const auto meta_path = sidecar_path(survival_out);
      write_sidecar(gen.meta, meta_path);
      report.seed = survival.seed;
      report.config = {{"n", survival.n}, {"dim", survival.feature_dim}, {"censor_rate", survival.censor_rate},
                       {"risk_scale", survival.risk_scale}, {"seed", survival.seed}};
      report.metrics["n_records"] = gen.data.records.size();
      report.metrics["censoring_rate"] = gen.data.censoring_rate();
      report.metrics["oracle_ci"] = survival_concordance(gen.data, gen.true_risk);
      report.artifacts = {{"data", survival_out}, {"meta", meta_path}};
    };
  });

  // contaminate ------------------------------------------------------------
  ContaminationParams contamination;
  std::string contaminate_in, contaminate_out;
  auto* contaminate_cmd = app.add_subcommand("contaminate", "Shuffle samples in local time windows");
  contaminate_cmd->add_option("--data", contaminate_in, "Input sequence CSV")->required();
  contaminate_cmd->add_option("--out", contaminate_out, "Output sequence CSV")->required();
  contaminate_cmd->add_option("--eta", contamination.eta, "Fraction of time steps selected")->capture_default_str();
  contaminate_cmd->add_option("--window,-M", contamination.M, "Window width M")->capture_default_str();
  contaminate_cmd->add_option("--seed", contamination.seed, "Random seed")->capture_default_str();
  add_report(contaminate_cmd);
  contaminate_cmd->callback([&] {
    action = [&] {
      const auto data = read_sequence_dataset(contaminate_in, {TrendOrder::Any});
      const auto noisy = contaminate(data, contamination);
      write_sequence_dataset(noisy, contaminate_out);
      std::size_t flipped = 0, total = 0;
      for (const auto& [id, seq] : data.sequences) {
        const auto& moved = noisy.sequences.at(id);
        std::map<std::int64_t, std::size_t> new_pos;  // original t -> new position
        for (std::size_t p = 0; p < moved.size(); ++p)
          for (std::size_t o = 0; o < seq.size(); ++o)
            if (seq[o].features == moved[p].features) new_pos[seq[o].t] = p;
        for (std::size_t i = 0; i < seq.size(); ++i)
          for (std::size_t j = i + 1; j < seq.size(); ++j, ++total)
            flipped += new_pos[seq[i].t] > new_pos[seq[j].t];
      }
      report.seed = contamination.seed;
      report.config = {{"data", contaminate_in}, {"eta", contamination.eta}, {"M", contamination.M},
                       {"seed", contamination.seed}};
      report.metrics["flipped_pair_fraction"] = total ? static_cast<double>(flipped) / static_cast<double>(total) : 0.0;
      report.artifacts = {{"data", contaminate_out}};
    };
  });

  // train ------------------------------------------------------------------
  TrainConfig train_config;
  std::string train_data, train_model, train_mode = "sequence", config_path;
  std::optional<std::string> opt_loss, opt_activation, opt_layers, opt_pair_mode;
  std::optional<std::size_t> opt_epochs, opt_batch, opt_pairs, opt_patience;
  std::optional<double> opt_lr, opt_val;
  std::optional<std::uint64_t> opt_seed;
  auto* train_cmd = app.add_subcommand("train", "Fit a trend model");
  train_cmd->add_option("--data", train_data, "Training CSV (sequence or survival)")->required();
  train_cmd->add_option("--model", train_model, "Output model file")->required();
  train_cmd->add_option("--mode", train_mode, "sequence|survival")->capture_default_str();
  train_cmd->add_option("--config", config_path, "Config file of key = value lines");
  train_cmd->add_option("--loss", opt_loss, "bce|l1");
  train_cmd->add_option("--activation", opt_activation, "tanh|relu");
  train_cmd->add_option("--layers", opt_layers, "Layer widths, e.g. 0,64,32,8 (0 = input width)");
  train_cmd->add_option("--epochs", opt_epochs, "Training epochs");
  train_cmd->add_option("--batch-size", opt_batch, "Pairs per minibatch");
  train_cmd->add_option("--pairs", opt_pairs, "Pairs per sequence (or per record) per epoch");
  train_cmd->add_option("--pair-mode", opt_pair_mode, "sampled|all_pairs");
  train_cmd->add_option("--lr", opt_lr, "Adam learning rate");
  train_cmd->add_option("--validation-fraction", opt_val, "Held-out fraction for early stopping");
  train_cmd->add_option("--patience", opt_patience, "Early stopping patience (0 disables)");
  train_cmd->add_option("--seed", opt_seed, "Random seed");
  add_report(train_cmd);

  auto resolve_train_config = [&] {
    if (!config_path.empty()) load_config_file(train_config, config_path);
    if (opt_loss) train_config.loss = parse_loss(*opt_loss);
    if (opt_activation) train_config.activation = parse_activation(*opt_activation);
    if (opt_layers) train_config.layer_dims = parse_dims(*opt_layers);
    if (opt_epochs) train_config.epochs = *opt_epochs;
    if (opt_batch) train_config.batch_size = *opt_batch;
    if (opt_pairs) train_config.pairs.pairs_per_sequence = *opt_pairs;
    if (opt_pair_mode) train_config.pairs.mode = parse_pair_mode(*opt_pair_mode);
    if (opt_lr) train_config.adam.lr = *opt_lr;
    if (opt_val) train_config.validation_fraction = *opt_val;
    if (opt_patience) train_config.early_stop_patience = *opt_patience;
    if (opt_seed) train_config.seed = *opt_seed;
    train_config.validate();
  };

  train_cmd->callback([&] {
    action = [&] {
      resolve_train_config();
      if (train_mode != "sequence" && train_mode != "survival")
        throw Error(Errc::InvalidConfig, "--mode must be sequence or survival");
      TrainResult result;
      std::size_t input_dim = 0;
      if (train_mode == "sequence") {
        const auto data = read_sequence_dataset(train_data, {TrendOrder::Any});
        input_dim = data.feature_dim;
        result = train(data, train_config);
      } else {
        const auto data = read_survival_dataset(train_data);
        input_dim = data.feature_dim;
        result = train(data, train_config);
      }
      serialize_model(result.model, train_model);
      report.seed = train_config.seed;
      report.config = config_to_json(train_config);
      report.config["resolved_layer_dims"] = result.model.layer_dims();
      report.config["mode"] = train_mode;
      report.config["data"] = train_data;
      const auto& h = result.history;
      report.metrics["input_dim"] = input_dim;
      report.metrics["epochs_run"] = h.epochs.size();
      report.metrics["best_epoch"] = h.best_epoch;
      report.metrics["train_loss"] = h.epochs.back().train_loss;
      report.metrics["best_validation_accuracy"] = h.epochs[h.best_epoch].val_accuracy;
      ordered_json curve = ordered_json::array();
      for (const auto& e : h.epochs) curve.push_back({{"train_loss", e.train_loss}, {"val_accuracy", e.val_accuracy}});
      report.metrics["history"] = curve;
      report.artifacts = {{"model", train_model}};
    };
  });

  // score ------------------------------------------------------------------
  std::string score_data, score_model, score_out, score_mode = "sequence";
  auto* score_cmd = app.add_subcommand("score", "Write per-sample trend scores as CSV");
  score_cmd->add_option("--data", score_data, "Input CSV")->required();
  score_cmd->add_option("--model", score_model, "Model file")->required();
  score_cmd->add_option("--out", score_out, "Output scores CSV")->required();
  score_cmd->add_option("--mode", score_mode, "sequence|survival")->capture_default_str();
  add_report(score_cmd);
  score_cmd->callback([&] {
    action = [&] {
      const auto model = deserialize_model(score_model);
      std::ofstream f(score_out, std::ios::binary | std::ios::trunc);
      if (!f) throw Error(Errc::Io, "cannot write '" + score_out + "'");
      std::size_t n = 0;
      if (score_mode == "sequence") {
        const auto data = read_sequence_dataset(score_data, {TrendOrder::Any});
        const auto scores = score(model, data);
        f << "seq_id,t,score\n";
        for (const auto& [id, seq] : data.sequences)
          for (std::size_t i = 0; i < seq.size(); ++i, ++n)
            f << id << ',' << seq[i].t << ',' << trendlab::detail::format_real(scores.at(id)[i]) << '\n';
      } else if (score_mode == "survival") {
        const auto data = read_survival_dataset(score_data);
        const auto scores = score(model, data);
        f << "id,score\n";
        for (std::size_t i = 0; i < data.records.size(); ++i, ++n)
          f << data.records[i].id << ',' << trendlab::detail::format_real(scores[i]) << '\n';
      } else {
        throw Error(Errc::InvalidConfig, "--mode must be sequence or survival");
      }
      report.config = {{"data", score_data}, {"model", score_model}, {"mode", score_mode}};
      report.metrics["n_scored"] = n;
      report.artifacts = {{"scores", score_out}};
    };
  });

  // eval-trend -------------------------------------------------------------
  std::string eval_data, eval_model;
  auto* eval_trend = app.add_subcommand("eval-trend", "Correlate scores with the true trend; Mann-Kendall of scores");
  eval_trend->add_option("--data", eval_data, "Sequence CSV (tau column enables correlations)")->required();
  eval_trend->add_option("--model", eval_model, "Model file")->required();
  add_report(eval_trend);
  eval_trend->callback([&] {
    action = [&] {
      const auto data = read_sequence_dataset(eval_data, {TrendOrder::Any});
      const auto model = deserialize_model(eval_model);
      const auto ev = evaluate_trend(data, score(model, data));
      report.config = {{"data", eval_data}, {"model", eval_model}};
      auto& m = report.metrics;
      if (data.trend_truth) {
        m["spearman_abs"] = ev.spearman_abs;
        m["pearson_abs"] = ev.pearson_abs;
        m["spearman_abs_pooled"] = ev.spearman_abs_pooled;
        m["pearson_abs_pooled"] = ev.pearson_abs_pooled;
        m["sequences_correlated"] = ev.sequences_correlated;
        m["sequences_skipped"] = ev.sequences_skipped;
      }
      m["pairwise_accuracy"] = ev.pairwise_accuracy;
      m["mk_S"] = ev.mk_S_mean;
      m["mk_normalized"] = ev.mk_normalized_mean;
      m["mk_p"] = ev.mk_p_median;
      m["mk_significant_fraction"] = ev.mk_significant_fraction;
    };
  });

  // eval-survival ----------------------------------------------------------
  std::string surv_data, surv_model, surv_meta;
  auto* eval_survival = app.add_subcommand("eval-survival", "Concordance index of model scores");
  eval_survival->add_option("--data", surv_data, "Survival CSV")->required();
  eval_survival->add_option("--model", surv_model, "Model file")->required();
  eval_survival->add_option("--meta", surv_meta, "True-risk sidecar; adds oracle_ci");
  add_report(eval_survival);
  eval_survival->callback([&] {
    action = [&] {
      const auto data = read_survival_dataset(surv_data);
      const auto model = deserialize_model(surv_model);
      report.config = {{"data", surv_data}, {"model", surv_model}};
      report.metrics["ci"] = survival_concordance(data, score(model, data));
      report.metrics["censoring_rate"] = data.censoring_rate();
      if (!surv_meta.empty()) {
        const auto meta = read_sidecar(surv_meta);
        std::map<std::string, double> risk_of(meta.rows.begin(), meta.rows.end());
        std::vector<double> risk;
        for (const auto& r : data.records) {
          auto it = risk_of.find(r.id);
          if (it == risk_of.end()) throw Error(Errc::InvalidDataset, "sidecar lacks record '" + r.id + "'");
          risk.push_back(it->second);
        }
        report.config["meta"] = surv_meta;
        report.metrics["oracle_ci"] = survival_concordance(data, risk);
      }
    };
  });

  // mk-test ----------------------------------------------------------------
  std::string mk_data, mk_column;
  double mk_alpha = 0.05;
  auto* mk_cmd = app.add_subcommand("mk-test", "Mann-Kendall test of one CSV column");
  mk_cmd->add_option("--data", mk_data, "CSV file with a header row")->required();
  mk_cmd->add_option("--column", mk_column, "Column name (default: first column)");
  mk_cmd->add_option("--alpha", mk_alpha, "Significance level")->capture_default_str();
  add_report(mk_cmd);
  mk_cmd->callback([&] {
    action = [&] {
      std::ifstream f(mk_data, std::ios::binary);
      if (!f) throw Error(Errc::Io, "cannot open '" + mk_data + "'");
      std::string line;
      std::size_t line_no = 0;
      if (!trendlab::detail::next_line(f, line, line_no)) throw Error(Errc::MissingHeader, "empty file");
      const auto header = trendlab::detail::split(line, ',');
      std::size_t col = 0;
      if (!mk_column.empty()) {
        auto it = std::find_if(header.begin(), header.end(),
                               [&](std::string_view h) { return trendlab::detail::trim(h) == mk_column; });
        if (it == header.end()) throw Error(Errc::MissingHeader, "no column named '" + mk_column + "'");
        col = static_cast<std::size_t>(it - header.begin());
      }
      std::vector<double> series;
      while (trendlab::detail::next_line(f, line, line_no)) {
        const auto fields = trendlab::detail::split(line, ',');
        if (fields.size() != header.size()) throw Error(Errc::RaggedRow, trendlab::detail::at_line(line_no));
        series.push_back(trendlab::detail::read_real_field(fields[col], line_no));
      }
      const auto mk = mann_kendall(series);
      report.config = {{"data", mk_data}, {"column", std::string(trendlab::detail::trim(header[col]))}, {"alpha", mk_alpha}};
      report.metrics = {{"n", mk.n}, {"mk_S", mk.S}, {"mk_normalized", mk.normalized}, {"mk_z", mk.z},
                        {"mk_p", mk.p_two_sided}, {"significant", mk.significant(mk_alpha)}};
    };
  });

  // noise-bench ------------------------------------------------------------
  std::string bench_train, bench_test, bench_out, bench_config, bench_grid = "0.2:2,0.2:5,0.5:10";
  std::size_t bench_seeds = 5;
  auto* bench = app.add_subcommand("noise-bench", "Clean-pair accuracy of bce vs l1 under label contamination");
  bench->add_option("--train", bench_train, "Clean training sequence CSV")->required();
  bench->add_option("--test", bench_test, "Clean test sequence CSV")->required();
  bench->add_option("--out", bench_out, "Output table CSV")->required();
  bench->add_option("--config", bench_config, "Training config file");
  bench->add_option("--grid", bench_grid, "Comma-separated eta:M cells")->capture_default_str();
  bench->add_option("--seeds", bench_seeds, "Seeds per cell")->capture_default_str();
  add_report(bench);
  bench->callback([&] {
    action = [&] {
      TrainConfig base;
      if (!bench_config.empty()) load_config_file(base, bench_config);
      base.validate();
      const auto grid = detail::parse_grid(bench_grid);
      const auto train_ds = read_sequence_dataset(bench_train, {TrendOrder::Any});
      const auto test_ds = read_sequence_dataset(bench_test, {TrendOrder::Any});
      std::ofstream f(bench_out, std::ios::binary | std::ios::trunc);
      if (!f) throw Error(Errc::Io, "cannot write '" + bench_out + "'");
      f << "eta,M,loss,seed,clean_accuracy\n";
      ordered_json cells = ordered_json::array();
      for (const auto& cell : grid) {
        double mean[2] = {0.0, 0.0};
        for (std::size_t s = 0; s < bench_seeds; ++s) {
          const auto noisy = contaminate(train_ds, {cell.eta, cell.M, derive_seed(base.seed, s)});
          for (int k = 0; k < 2; ++k) {
            TrainConfig c = base;
            c.loss = k == 0 ? LossKind::Bce : LossKind::L1;
            c.seed = derive_seed(base.seed, s, 1);
            const auto model = train(noisy, c).model;
            const double acc = clean_pair_accuracy(test_ds, score(model, test_ds));
            mean[k] += acc / static_cast<double>(bench_seeds);
            f << trendlab::detail::format_real(cell.eta) << ',' << cell.M << ',' << to_string(c.loss) << ',' << s << ','
              << trendlab::detail::format_real(acc) << '\n';
          }
        }
        cells.push_back({{"eta", cell.eta}, {"M", cell.M}, {"bce_mean_accuracy", mean[0]}, {"l1_mean_accuracy", mean[1]}});
      }
      report.seed = base.seed;
      report.config = config_to_json(base);
      report.config["grid"] = bench_grid;
      report.config["seeds"] = bench_seeds;
      report.config["train"] = bench_train;
      report.config["test"] = bench_test;
      report.metrics["cells"] = cells;
      report.artifacts = {{"table", bench_out}};
    };
  });

  std::vector<const char*> argv{"trendlab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  for (auto* sub : app.get_subcommands())
    if (sub->parsed()) report.command = sub->get_name();
  try {
    action();
    detail::emit_report(report, report_path, out, start);
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.category()) {
      case ErrorCategory::Usage: return kUsage;
      case ErrorCategory::Numeric: return kNumeric;
      case ErrorCategory::Data: return kData;
    }
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
}

}  // namespace trendlab::cli
