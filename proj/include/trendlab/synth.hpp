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

// Synthetic data with a known hidden trend.
//
// Every generator derives one child seed per sequence (or per record block)
// from the master seed, so output is bit-identical for any thread count.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trendlab/dataset.hpp"
#include "trendlab/error.hpp"
#include "trendlab/parallel.hpp"
#include "trendlab/random.hpp"

namespace trendlab {

/// Sequence ids sort in generation order: s00000, s00001, ...
inline std::string sequence_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%05zu", index);
  return buf;
}

struct GeneratedSequences {
  SequenceDataset data;
  Sidecar meta;
};

// ---------------------------------------------------------------------------
// Ball-springs ageing system

struct SpringsConfig {
  std::size_t n_balls = 10;
  std::size_t space_dim = 2;
  std::size_t sim_steps = 50;
  double dt = 0.01;
  double connection_prob = 0.5;
  double base_rigidity = 1.0;
  double rest_length = 1.0;
  double alpha_min = 0.9;
  double alpha_max = 1.0;
  std::size_t samples_per_sequence = 50;
  std::size_t n_sequences = 100;
  std::uint64_t seed = 0;
  /// Overrides the per-sequence draw of alpha (testing).
  std::optional<double> fixed_alpha;

  void validate() const {
    if (n_balls < 2) throw Error(Errc::InvalidConfig, "n_balls must be >= 2");
    if (space_dim < 1) throw Error(Errc::InvalidConfig, "space_dim must be >= 1");
    if (sim_steps < 1) throw Error(Errc::InvalidConfig, "sim_steps must be >= 1");
    if (!(dt > 0.0)) throw Error(Errc::InvalidConfig, "dt must be > 0");
    if (!(connection_prob > 0.0 && connection_prob <= 1.0))
      throw Error(Errc::InvalidConfig, "connection_prob must lie in (0, 1]");
    if (!(alpha_min > 0.0 && alpha_min <= alpha_max && alpha_max <= 1.0))
      throw Error(Errc::InvalidConfig, "alpha range must satisfy 0 < min <= max <= 1");
    if (fixed_alpha && !(*fixed_alpha > 0.0 && *fixed_alpha <= 1.0))
      throw Error(Errc::InvalidConfig, "fixed alpha must lie in (0, 1]");
    if (samples_per_sequence < 2) throw Error(Errc::InvalidConfig, "samples_per_sequence must be >= 2");
    if (n_sequences < 1) throw Error(Errc::InvalidConfig, "n_sequences must be >= 1");
  }
};

struct Spring {
  std::size_t a = 0;
  std::size_t b = 0;
  double rigidity = 1.0;
};

/// Unit-mass balls joined by Hookean springs, integrated with semi-implicit
/// Euler. Each spring force is applied with opposite signs to its two ends,
/// so total momentum is conserved up to rounding.
class SpringSystem {
 public:
  SpringSystem(std::size_t n_balls, std::size_t space_dim, std::vector<Spring> springs, double rest_length)
      : n_(n_balls), dim_(space_dim), springs_(std::move(springs)), rest_(rest_length),
        pos_(n_balls * space_dim, 0.0), vel_(n_balls * space_dim, 0.0), force_(n_balls * space_dim, 0.0) {}

  std::vector<double>& positions() { return pos_; }
  const std::vector<double>& positions() const { return pos_; }
  std::vector<double>& velocities() { return vel_; }
  const std::vector<double>& velocities() const { return vel_; }
  std::vector<Spring>& springs() { return springs_; }
  const std::vector<Spring>& springs() const { return springs_; }

  void step(double dt) {
    std::fill(force_.begin(), force_.end(), 0.0);
    double delta[8];
    std::vector<double> big_delta;
    double* d = dim_ <= 8 ? delta : (big_delta.resize(dim_), big_delta.data());
    for (const auto& s : springs_) {
      double len2 = 0.0;
      for (std::size_t c = 0; c < dim_; ++c) {
        d[c] = pos_[s.a * dim_ + c] - pos_[s.b * dim_ + c];
        len2 += d[c] * d[c];
      }
      const double len = std::sqrt(len2);
      if (len == 0.0) continue;
      const double magnitude = -s.rigidity * (len - rest_) / len;
      for (std::size_t c = 0; c < dim_; ++c) {
        const double f = magnitude * d[c];
        force_[s.a * dim_ + c] += f;
        force_[s.b * dim_ + c] -= f;
      }
    }
    for (std::size_t i = 0; i < vel_.size(); ++i) {
      vel_[i] += dt * force_[i];
      pos_[i] += dt * vel_[i];
    }
  }

  /// Total momentum (unit masses), one component per space dimension.
  std::vector<double> momentum() const {
    std::vector<double> p(dim_, 0.0);
    for (std::size_t b = 0; b < n_; ++b)
      for (std::size_t c = 0; c < dim_; ++c) p[c] += vel_[b * dim_ + c];
    return p;
  }

 private:
  std::size_t n_;
  std::size_t dim_;
  std::vector<Spring> springs_;
  double rest_;
  std::vector<double> pos_;
  std::vector<double> vel_;
  std::vector<double> force_;
};

/// Symmetric random adjacency where every ball has at least one spring.
inline std::vector<Spring> random_springs(const SpringsConfig& config, Rng& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<Spring> springs;
    std::vector<int> degree(config.n_balls, 0);
    for (std::size_t a = 0; a < config.n_balls; ++a)
      for (std::size_t b = a + 1; b < config.n_balls; ++b)
        if (rng.bernoulli(config.connection_prob)) {
          springs.push_back({a, b, config.base_rigidity});
          ++degree[a];
          ++degree[b];
        }
    if (std::none_of(degree.begin(), degree.end(), [](int d) { return d == 0; })) return springs;
  }
  throw Error(Errc::IsolatedBallAfterRetries,
              "no graph without isolated balls after 100 draws; raise connection_prob");
}

/// One ageing sequence with everything needed to audit it.
struct SpringsSequence {
  double alpha = 1.0;
  std::vector<std::vector<double>> features;  ///< per sample: frames x balls x dims
  std::vector<double> tau;                    ///< cumulative degradation exponent
  std::vector<std::vector<double>> rigidity;  ///< per sample: rigidity of each spring
  std::vector<std::vector<double>> final_momentum;
};

inline SpringsSequence simulate_springs_sequence(const SpringsConfig& config, std::size_t index) {
  Rng rng(derive_seed(config.seed, index));
  SpringsSequence out;
  out.alpha = config.fixed_alpha ? *config.fixed_alpha : rng.uniform(config.alpha_min, config.alpha_max);
  SpringSystem system(config.n_balls, config.space_dim, random_springs(config, rng), config.rest_length);
  const double log_alpha = std::log(out.alpha);
  const std::size_t width = config.n_balls * config.space_dim;

  double tau = 0.0;
  for (std::size_t i = 1; i <= config.samples_per_sequence; ++i) {
    for (auto& x : system.positions()) x = rng.normal();
    std::fill(system.velocities().begin(), system.velocities().end(), 0.0);

    std::vector<double> trajectory;
    trajectory.reserve(width * config.sim_steps);
    for (std::size_t frame = 0; frame < config.sim_steps; ++frame) {
      if (frame > 0) system.step(config.dt);
      for (double x : system.positions()) {
        if (!(std::abs(x) <= 1e6))
          throw Error(Errc::NumericBlowup, "ball position exceeded 1e6 in sequence " + std::to_string(index) +
                                               "; use a smaller dt");
      }
      trajectory.insert(trajectory.end(), system.positions().begin(), system.positions().end());
    }
    out.features.push_back(std::move(trajectory));
    out.tau.push_back(tau);
    std::vector<double> k;
    for (const auto& s : system.springs()) k.push_back(s.rigidity);
    out.rigidity.push_back(std::move(k));
    out.final_momentum.push_back(system.momentum());

    // Age one random spring between sample i and i + 1.
    if (i < config.samples_per_sequence) {
      auto& springs = system.springs();
      springs[rng.below(springs.size())].rigidity *= std::pow(out.alpha, static_cast<double>(i));
      tau -= static_cast<double>(i) * log_alpha;
    }
  }
  return out;
}

/// Sequences of spring-system trajectories whose springs weaken at a
/// per-sequence rate alpha. trend_truth is the cumulative degradation
/// exponent; the sidecar holds alpha per sequence.
inline GeneratedSequences simulate_ball_springs(const SpringsConfig& config) {
  config.validate();
  std::vector<SpringsSequence> seqs(config.n_sequences);
  parallel_for(config.n_sequences, [&](std::size_t i) { seqs[i] = simulate_springs_sequence(config, i); });

  GeneratedSequences out;
  out.data.feature_dim = config.n_balls * config.space_dim * config.sim_steps;
  out.data.trend_truth.emplace();
  out.meta = {"seq_id", "alpha", {}};
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    const std::string id = sequence_name(s);
    auto& samples = out.data.sequences[id];
    for (std::size_t i = 0; i < seqs[s].features.size(); ++i)
      samples.push_back({id, static_cast<std::int64_t>(i), std::move(seqs[s].features[i])});
    (*out.data.trend_truth)[id] = std::move(seqs[s].tau);
    out.meta.rows.emplace_back(id, seqs[s].alpha);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monotone mixture: observed = tanh(A z + b) + noise, z = [h(tau), nuisance]

enum class TrendTransform { Identity, Cube, Exp };

inline TrendTransform parse_trend_transform(std::string_view s) {
  if (s == "identity") return TrendTransform::Identity;
  if (s == "cube") return TrendTransform::Cube;
  if (s == "exp") return TrendTransform::Exp;
  throw Error(Errc::InvalidConfig, "unknown trend transform '" + std::string(s) + "'");
}
constexpr std::string_view to_string(TrendTransform t) {
  switch (t) {
    case TrendTransform::Identity: return "identity";
    case TrendTransform::Cube: return "cube";
    case TrendTransform::Exp: return "exp";
  }
  return "?";
}

enum class MixingKind { RandomAffine, Identity };

inline MixingKind parse_mixing(std::string_view s) {
  if (s == "random") return MixingKind::RandomAffine;
  if (s == "identity") return MixingKind::Identity;
  throw Error(Errc::InvalidConfig, "unknown mixing '" + std::string(s) + "'");
}
constexpr std::string_view to_string(MixingKind m) { return m == MixingKind::Identity ? "identity" : "random"; }

struct MixtureConfig {
  std::size_t n_sequences = 400;
  std::size_t samples_per_sequence = 30;
  /// Latent nuisance factors: cycle, seasonality, then white-noise irregularity.
  std::size_t nuisance_dim = 6;
  TrendTransform trend_transform = TrendTransform::Identity;
  MixingKind mixing = MixingKind::RandomAffine;
  double noise_std = 0.05;
  double max_condition = 20.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_sequences < 1) throw Error(Errc::InvalidConfig, "n_sequences must be >= 1");
    if (samples_per_sequence < 2) throw Error(Errc::InvalidConfig, "samples_per_sequence must be >= 2");
    if (!(noise_std >= 0.0)) throw Error(Errc::InvalidConfig, "noise_std must be >= 0");
    if (!(max_condition >= 1.0)) throw Error(Errc::InvalidConfig, "max_condition must be >= 1");
  }
};

struct MixtureOutput {
  GeneratedSequences sequences;
  std::size_t latent_dim = 0;
  std::vector<double> mixing_matrix;  ///< row-major latent_dim x latent_dim
  std::vector<double> mixing_bias;
  /// Latent vectors per sequence, trend coordinate (standardized h(tau)) first.
  std::map<std::string, std::vector<std::vector<double>>> latents;
};

inline double condition_number(const std::vector<double>& a, std::size_t n) {
  Eigen::MatrixXd m(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) m(r, c) = a[r * n + c];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / sv(sv.size() - 1);
}

inline Eigen::MatrixXd random_orthogonal(std::size_t n, Rng& rng) {
  Eigen::MatrixXd g(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) g(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Sign fix makes Q Haar distributed.
  const Eigen::MatrixXd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
  for (std::size_t c = 0; c < n; ++c)
    if (rmat(c, c) < 0.0) q.col(c) *= -1.0;
  return q;
}

/// U diag(s) V^T with Haar-random U, V and singular values s ~ U[0.75, 1.5].
inline std::vector<double> random_mixing_matrix(std::size_t n, Rng& rng) {
  const Eigen::MatrixXd u = random_orthogonal(n, rng);
  const Eigen::MatrixXd v = random_orthogonal(n, rng);
  Eigen::VectorXd s(n);
  for (std::size_t i = 0; i < n; ++i) s(i) = rng.uniform(0.75, 1.5);
  const Eigen::MatrixXd a = u * s.asDiagonal() * v.transpose();
  std::vector<double> out(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) out[r * n + c] = a(r, c);
  return out;
}

inline double apply_transform(TrendTransform t, double tau) {
  switch (t) {
    case TrendTransform::Identity: return tau;
    case TrendTransform::Cube: return tau * tau * tau;
    case TrendTransform::Exp: return std::exp(tau);
  }
  return tau;
}

/// Sequences whose observations mix a strictly increasing trend with cycle,
/// seasonality and noise factors through a random invertible map. The trend
/// coordinate is h(tau), standardized over the whole dataset before mixing.
/// tau, the nuisance factors and the mixing map depend only on the seed, so
/// datasets that differ only in h share everything else.
inline MixtureOutput generate_monotone_mixture_detailed(const MixtureConfig& config) {
  config.validate();
  const std::size_t dim = 1 + config.nuisance_dim;
  const std::size_t n = config.samples_per_sequence;

  MixtureOutput out;
  out.latent_dim = dim;
  out.mixing_matrix.assign(dim * dim, 0.0);
  out.mixing_bias.assign(dim, 0.0);
  if (config.mixing == MixingKind::Identity) {
    for (std::size_t i = 0; i < dim; ++i) out.mixing_matrix[i * dim + i] = 1.0;
  } else {
    Rng rng(derive_seed(config.seed, 0x313c));
    do {
      out.mixing_matrix = random_mixing_matrix(dim, rng);
    } while (condition_number(out.mixing_matrix, dim) > config.max_condition);
    for (auto& b : out.mixing_bias) b = rng.uniform(-0.2, 0.2);
  }

  struct Raw {
    std::vector<double> tau;
    std::vector<std::vector<double>> z;
    std::vector<std::vector<double>> noise;
  };
  std::vector<Raw> raw(config.n_sequences);
  parallel_for(config.n_sequences, [&](std::size_t s) {
    Rng rng(derive_seed(config.seed, s));
    Raw& r = raw[s];
    double tau = 1.0 + rng.uniform();
    double cycle_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double season_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    constexpr double kSeasonPeriod = 7.0;
    for (std::size_t i = 0; i < n; ++i) {
      tau += std::max(rng.exponential(1.0), 1e-9) / static_cast<double>(n);
      r.tau.push_back(tau);
      std::vector<double> z(dim, 0.0);
      cycle_phase += 2.0 * std::numbers::pi / 10.0 + rng.normal(0.0, 0.3);
      if (dim > 1) z[1] = std::sin(cycle_phase);
      if (dim > 2) z[2] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / kSeasonPeriod + season_phase);
      for (std::size_t k = 3; k < dim; ++k) z[k] = rng.normal();
      r.z.push_back(std::move(z));
      std::vector<double> eps(dim);
      for (auto& e : eps) e = rng.normal();
      r.noise.push_back(std::move(eps));
    }
  });

  double mean = 0.0, sq = 0.0;
  std::size_t count = 0;
  for (const auto& r : raw)
    for (double t : r.tau) {
      const double h = apply_transform(config.trend_transform, t);
      mean += h;
      sq += h * h;
      ++count;
    }
  mean /= static_cast<double>(count);
  const double sd = std::max(std::sqrt(std::max(sq / static_cast<double>(count) - mean * mean, 0.0)), 1e-12);

  auto& data = out.sequences.data;
  data.feature_dim = dim;
  data.trend_truth.emplace();
  out.sequences.meta = {"seq_id", "tau_start", {}};
  for (std::size_t s = 0; s < raw.size(); ++s) {
    const std::string id = sequence_name(s);
    auto& samples = data.sequences[id];
    auto& lat = out.latents[id];
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> z = raw[s].z[i];
      z[0] = (apply_transform(config.trend_transform, raw[s].tau[i]) - mean) / sd;
      std::vector<double> x(dim);
      for (std::size_t r = 0; r < dim; ++r) {
        double v = out.mixing_bias[r];
        for (std::size_t c = 0; c < dim; ++c) v += out.mixing_matrix[r * dim + c] * z[c];
        x[r] = std::tanh(v) + config.noise_std * raw[s].noise[i][r];
      }
      samples.push_back({id, static_cast<std::int64_t>(i), std::move(x)});
      lat.push_back(std::move(z));
    }
    (*data.trend_truth)[id] = raw[s].tau;
    out.sequences.meta.rows.emplace_back(id, raw[s].tau.front());
  }
  return out;
}

inline GeneratedSequences generate_monotone_mixture(const MixtureConfig& config) {
  return std::move(generate_monotone_mixture_detailed(config).sequences);
}

// ---------------------------------------------------------------------------
// Censored survival data with a known linear log-hazard

struct SurvivalConfig {
  std::size_t n = 2000;
  std::size_t feature_dim = 10;
  double censor_rate = 0.5;
  /// Norm of the true coefficient vector, i.e. the spread of the log-hazard.
  double risk_scale = 2.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 1) throw Error(Errc::InvalidConfig, "n must be >= 1");
    if (feature_dim < 1) throw Error(Errc::InvalidConfig, "feature_dim must be >= 1");
    if (!(censor_rate >= 0.0 && censor_rate < 1.0)) throw Error(Errc::InvalidConfig, "censor_rate must lie in [0, 1)");
    if (!(risk_scale >= 0.0)) throw Error(Errc::InvalidConfig, "risk_scale must be >= 0");
  }
};

struct GeneratedSurvival {
  SurvivalDataset data;
  std::vector<double> true_risk;
  Sidecar meta;  ///< id -> true risk
};

/// Exponential censoring rate c with mean_i c / (c + exp(r_i)) = target.
inline double calibrate_censoring_rate(const std::vector<double>& risk, double target) {
  auto expected = [&](double log_c) {
    const double c = std::exp(log_c);
    double s = 0.0;
    for (double r : risk) s += c / (c + std::exp(r));
    return s / static_cast<double>(risk.size());
  };
  double lo = -50.0, hi = 50.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (expected(mid) < target ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

/// Features ~ N(0, I), log-hazard r = w.x, event time ~ Exp(exp(r)),
/// independent exponential censoring calibrated to `censor_rate`.
inline GeneratedSurvival generate_survival(const SurvivalConfig& config) {
  config.validate();
  Rng wrng(derive_seed(config.seed, 0x3e16));
  std::vector<double> w(config.feature_dim);
  double norm = 0.0;
  for (auto& x : w) {
    x = wrng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : w) x *= norm > 0.0 ? config.risk_scale / norm : 0.0;

  GeneratedSurvival out;
  out.data.feature_dim = config.feature_dim;
  out.data.records.resize(config.n);
  out.true_risk.resize(config.n);
  std::vector<double> event_time(config.n), censor_draw(config.n);
  parallel_for(config.n, [&](std::size_t i) {
    Rng rng(derive_seed(config.seed, i));
    auto& rec = out.data.records[i];
    char id[32];
    std::snprintf(id, sizeof(id), "p%05zu", i);
    rec.id = id;
    rec.features.resize(config.feature_dim);
    double r = 0.0;
    for (std::size_t c = 0; c < config.feature_dim; ++c) {
      rec.features[c] = rng.normal();
      r += w[c] * rec.features[c];
    }
    out.true_risk[i] = r;
    event_time[i] = rng.exponential(std::exp(r));
    censor_draw[i] = rng.exponential(1.0);
  });

  const double censor_rate =
      config.censor_rate > 0.0 ? calibrate_censoring_rate(out.true_risk, config.censor_rate) : 0.0;
  out.meta = {"id", "risk", {}};
  for (std::size_t i = 0; i < config.n; ++i) {
    auto& rec = out.data.records[i];
    const double censor_time = censor_rate > 0.0 ? censor_draw[i] / censor_rate : std::numeric_limits<double>::infinity();
    rec.event = event_time[i] <= censor_time ? 1 : 0;
    rec.time = std::min(event_time[i], censor_time);
    out.meta.rows.emplace_back(rec.id, out.true_risk[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Local order contamination

struct ContaminationParams {
  double eta = 0.0;     ///< fraction of time steps whose neighbourhood is shuffled
  std::size_t M = 2;    ///< window width (maximum temporal dispersion)
  std::uint64_t seed = 0;
};

/// Window of M positions around 1-based position i, clipped to [1, n]:
/// {i - ceil(M/2) + 1, ..., i + floor(M/2)}. Returned 0-based, half open.
inline std::pair<std::size_t, std::size_t> contamination_window(std::size_t i, std::size_t M, std::size_t n) {
  const auto lo = static_cast<std::int64_t>(i) - static_cast<std::int64_t>((M + 1) / 2) + 1;
  const auto hi = static_cast<std::int64_t>(i) + static_cast<std::int64_t>(M / 2);
  const auto first = std::max<std::int64_t>(lo, 1);
  const auto last = std::min<std::int64_t>(hi, static_cast<std::int64_t>(n));
  return {static_cast<std::size_t>(first - 1), static_cast<std::size_t>(last)};
}

/// Position -> original sample index after contaminating one sequence of
/// length n. Selected positions are processed in increasing order and each
/// window shuffles the current arrangement.
inline std::vector<std::size_t> contamination_permutation(std::size_t n, const ContaminationParams& params, Rng& rng) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  const auto k = static_cast<std::uint64_t>(std::ceil(params.eta * static_cast<double>(n) - 1e-9));
  for (auto pick : rng.distinct(n, k)) {
    auto [first, last] = contamination_window(static_cast<std::size_t>(pick) + 1, params.M, n);
    rng.shuffle(std::span<std::size_t>(perm.data() + first, last - first));
  }
  return perm;
}

/// Shuffles samples inside local windows and re-labels time by the new
/// position, so time-order labels become noisy. The time grid is kept; each
/// sample keeps its own clean trend value (trend_truth moves with it), so
/// the output's trend column is generally no longer sorted.
inline SequenceDataset contaminate(const SequenceDataset& data, const ContaminationParams& params) {
  if (!(params.eta >= 0.0 && params.eta <= 1.0)) throw Error(Errc::InvalidConfig, "eta must lie in [0, 1]");
  if (params.M < 1) throw Error(Errc::InvalidConfig, "M must be >= 1");
  for (const auto& [id, seq] : data.sequences)
    if (params.M > seq.size())
      throw Error(Errc::WindowTooLarge, "M = " + std::to_string(params.M) + " exceeds length " +
                                            std::to_string(seq.size()) + " of sequence '" + id + "'");

  SequenceDataset out;
  out.feature_dim = data.feature_dim;
  if (data.trend_truth) out.trend_truth.emplace();
  std::size_t index = 0;
  for (const auto& [id, seq] : data.sequences) {
    Rng rng(derive_seed(params.seed, index++));
    const auto perm = contamination_permutation(seq.size(), params, rng);
    auto& samples = out.sequences[id];
    std::vector<double> taus;
    for (std::size_t p = 0; p < seq.size(); ++p) {
      Sample s = seq[perm[p]];
      s.t = seq[p].t;
      samples.push_back(std::move(s));
      if (data.trend_truth) taus.push_back(data.trend_truth->at(id)[perm[p]]);
    }
    if (data.trend_truth) (*out.trend_truth)[id] = std::move(taus);
  }
  return out;
}

}  // namespace trendlab
