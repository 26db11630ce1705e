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

// A small dense network with a linear scoring head:
//
//   a_0 = x
//   a_k = act(W_k a_{k-1} + b_k)     hidden layers
//   e   = W_L a_{L-1} + b_L          embedding (no activation)
//   score = beta . e
//
// Forward and backward work on one sample at a time; the trainer loops over
// pairs and accumulates gradients.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trendlab/error.hpp"
#include "trendlab/random.hpp"

namespace trendlab {

enum class Activation { Tanh, Relu };

constexpr std::string_view to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }

inline Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw Error(Errc::InvalidConfig, "unknown activation '" + std::string(name) + "'");
}

/// Affine map R^in -> R^out. Weights are row-major (out x in).
struct Dense {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  double& w(std::size_t o, std::size_t i) { return weight[o * in + i]; }
  double w(std::size_t o, std::size_t i) const { return weight[o * in + i]; }

  bool operator==(const Dense&) const = default;
};

struct ParamSet {
  std::vector<Dense> layers;
  std::vector<double> beta;

  bool operator==(const ParamSet&) const = default;

  std::vector<std::size_t> layer_dims() const {
    std::vector<std::size_t> dims;
    if (layers.empty()) return dims;
    dims.push_back(layers.front().in);
    for (const auto& l : layers) dims.push_back(l.out);
    return dims;
  }

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in; }
  std::size_t embedding_dim() const { return layers.empty() ? 0 : layers.back().out; }

  /// Calls f(std::span<double>) for every parameter block, in a fixed order:
  /// W_1, b_1, ..., W_L, b_L, beta.
  template <typename F>
  void for_each_block(F&& f) {
    for (auto& l : layers) {
      f(std::span<double>(l.weight));
      f(std::span<double>(l.bias));
    }
    f(std::span<double>(beta));
  }

  template <typename F>
  void for_each_block(F&& f) const {
    for (const auto& l : layers) {
      f(std::span<const double>(l.weight));
      f(std::span<const double>(l.bias));
    }
    f(std::span<const double>(beta));
  }

  std::size_t size() const {
    std::size_t n = 0;
    for_each_block([&](std::span<const double> b) { n += b.size(); });
    return n;
  }

  ParamSet zeros_like() const {
    ParamSet z = *this;
    z.for_each_block([](std::span<double> b) { std::fill(b.begin(), b.end(), 0.0); });
    return z;
  }

  bool same_shape(const ParamSet& other) const {
    if (layers.size() != other.layers.size() || beta.size() != other.beta.size()) return false;
    for (std::size_t k = 0; k < layers.size(); ++k)
      if (layers[k].in != other.layers[k].in || layers[k].out != other.layers[k].out ||
          layers[k].weight.size() != other.layers[k].weight.size() ||
          layers[k].bias.size() != other.layers[k].bias.size())
        return false;
    return true;
  }
};

inline void check_layer_dims(std::span<const std::size_t> dims) {
  if (dims.size() < 2) throw Error(Errc::EmptyLayerList, "need at least input and embedding widths");
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (dims[k] == 0) throw Error(Errc::ZeroWidthLayer, "layer " + std::to_string(k) + " has width 0");
}

/// Glorot-uniform weights, zero biases, and beta ~ U[-a, a] with
/// a = sqrt(6 / (d_e + 1)). Deterministic in `seed`.
inline ParamSet init_params(std::span<const std::size_t> layer_dims, std::uint64_t seed) {
  check_layer_dims(layer_dims);
  Rng rng(seed);
  ParamSet p;
  for (std::size_t k = 0; k + 1 < layer_dims.size(); ++k) {
    Dense l;
    l.in = layer_dims[k];
    l.out = layer_dims[k + 1];
    const double a = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
    l.weight.resize(l.in * l.out);
    for (auto& w : l.weight) w = rng.uniform(-a, a);
    l.bias.assign(l.out, 0.0);
    p.layers.push_back(std::move(l));
  }
  const std::size_t de = layer_dims.back();
  const double a = std::sqrt(6.0 / static_cast<double>(de + 1));
  p.beta.resize(de);
  for (auto& b : p.beta) b = rng.uniform(-a, a);
  return p;
}

inline ParamSet init_params(const std::vector<std::size_t>& layer_dims, std::uint64_t seed) {
  return init_params(std::span<const std::size_t>(layer_dims), seed);
}

/// Per-layer values kept by forward() for the backward pass.
struct ForwardCache {
  std::vector<std::vector<double>> pre;   ///< z_k, k = 1..L
  std::vector<std::vector<double>> post;  ///< a_k, k = 0..L (a_0 = x, a_L = embedding)
};

struct ForwardResult {
  std::vector<double> embedding;
  double score = 0.0;
  ForwardCache cache;
};

namespace detail {

inline double activate(Activation act, double z) { return act == Activation::Tanh ? std::tanh(z) : (z > 0.0 ? z : 0.0); }

inline double activate_grad(Activation act, double z, double a) {
  return act == Activation::Tanh ? 1.0 - a * a : (z > 0.0 ? 1.0 : 0.0);
}

}  // namespace detail

/// Fills `cache` and returns the score. Reuses cache storage across calls.
inline double forward_into(const ParamSet& params, Activation act, std::span<const double> x, ForwardCache& cache) {
  if (params.layers.empty()) throw Error(Errc::EmptyLayerList, "network has no layers");
  if (x.size() != params.input_dim())
    throw Error(Errc::DimensionMismatch,
                "input has " + std::to_string(x.size()) + " values, network expects " + std::to_string(params.input_dim()));
  const std::size_t n_layers = params.layers.size();
  cache.pre.resize(n_layers);
  cache.post.resize(n_layers + 1);
  cache.post[0].assign(x.begin(), x.end());
  for (std::size_t k = 0; k < n_layers; ++k) {
    const Dense& l = params.layers[k];
    const std::vector<double>& a = cache.post[k];
    std::vector<double>& z = cache.pre[k];
    std::vector<double>& out = cache.post[k + 1];
    z.resize(l.out);
    out.resize(l.out);
    const bool last = k + 1 == n_layers;
    for (std::size_t o = 0; o < l.out; ++o) {
      const double* row = l.weight.data() + o * l.in;
      double s = l.bias[o];
      for (std::size_t i = 0; i < l.in; ++i) s += row[i] * a[i];
      z[o] = s;
      out[o] = last ? s : detail::activate(act, s);
    }
  }
  const std::vector<double>& e = cache.post.back();
  double score = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) score += params.beta[i] * e[i];
  return score;
}

inline ForwardResult forward(const ParamSet& params, Activation act, std::span<const double> x) {
  ForwardResult r;
  r.score = forward_into(params, act, x, r.cache);
  r.embedding = r.cache.post.back();
  return r;
}

namespace detail {

inline void check_cache(const ParamSet& params, const ForwardCache& cache) {
  const std::size_t n_layers = params.layers.size();
  bool ok = cache.pre.size() == n_layers && cache.post.size() == n_layers + 1 &&
            cache.post[0].size() == params.input_dim();
  for (std::size_t k = 0; ok && k < n_layers; ++k)
    ok = cache.pre[k].size() == params.layers[k].out && cache.post[k + 1].size() == params.layers[k].out;
  if (!ok) throw Error(Errc::CacheMismatch, "forward cache does not match network shape");
}

}  // namespace detail

/// Adds upstream * d(score)/d(params) into `grads`. `scratch` avoids
/// per-call allocation; its contents are irrelevant.
inline void accumulate_backward(const ParamSet& params, Activation act, const ForwardCache& cache, double upstream,
                                ParamSet& grads, std::vector<double>& scratch) {
  detail::check_cache(params, cache);
  if (!grads.same_shape(params)) throw Error(Errc::ShapeMismatch, "gradient buffer shape differs from parameters");
  const std::size_t n_layers = params.layers.size();
  const std::vector<double>& e = cache.post.back();
  for (std::size_t i = 0; i < e.size(); ++i) grads.beta[i] += upstream * e[i];

  // delta = d(loss)/d(z_k) for the current layer
  std::vector<double> delta(params.beta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = upstream * params.beta[i];

  for (std::size_t k = n_layers; k-- > 0;) {
    const Dense& l = params.layers[k];
    Dense& g = grads.layers[k];
    const std::vector<double>& a = cache.post[k];
    for (std::size_t o = 0; o < l.out; ++o) {
      const double d = delta[o];
      g.bias[o] += d;
      if (d == 0.0) continue;
      double* grow = g.weight.data() + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) grow[i] += d * a[i];
    }
    if (k == 0) break;
    scratch.assign(l.in, 0.0);
    for (std::size_t o = 0; o < l.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = l.weight.data() + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) scratch[i] += row[i] * d;
    }
    const std::vector<double>& z_prev = cache.pre[k - 1];
    for (std::size_t i = 0; i < l.in; ++i) scratch[i] *= detail::activate_grad(act, z_prev[i], a[i]);
    delta.swap(scratch);
  }
}

/// Exact gradient of upstream * score with respect to every parameter.
inline ParamSet backward(const ParamSet& params, Activation act, const ForwardCache& cache, double upstream) {
  ParamSet grads = params.zeros_like();
  std::vector<double> scratch;
  accumulate_backward(params, act, cache, upstream, grads, scratch);
  return grads;
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig hyper;
  ParamSet m;
  ParamSet v;
  std::uint64_t step = 0;

  static AdamState for_params(const ParamSet& params, AdamConfig hyper = {}) {
    return AdamState{hyper, params.zeros_like(), params.zeros_like(), 0};
  }
};

/// One bias-corrected Adam update of `params` in place.
inline void adam_step(AdamState& state, ParamSet& params, const ParamSet& grads) {
  if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v))
    throw Error(Errc::ShapeMismatch, "Adam state, parameters and gradients differ in shape");
  state.step += 1;
  const auto& h = state.hyper;
  const double k = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(h.beta1, k);
  const double c2 = 1.0 - std::pow(h.beta2, k);

  auto update = [&](std::span<double> theta, std::span<const double> g, std::span<double> m, std::span<double> v) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
      v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      theta[i] -= h.lr * m_hat / (std::sqrt(v_hat) + h.eps);
    }
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].weight, grads.layers[l].weight, state.m.layers[l].weight, state.v.layers[l].weight);
    update(params.layers[l].bias, grads.layers[l].bias, state.m.layers[l].bias, state.v.layers[l].bias);
  }
  update(params.beta, grads.beta, state.m.beta, state.v.beta);
}

/// Worst relative disagreement between backward() and central differences
/// of the score, |a - n| / max(1e-8, |a| + |n|), over all parameters at a
/// random input. Biases are randomized so that every block is exercised.
/// For relu the input is resampled until no pre-activation is within 1e-3
/// of the kink.
inline double grad_check(std::span<const std::size_t> layer_dims, std::uint64_t seed,
                         Activation act = Activation::Tanh, double step = 1e-5) {
  ParamSet params = init_params(layer_dims, seed);
  Rng rng(derive_seed(seed, 1));
  for (auto& l : params.layers)
    for (auto& b : l.bias) b = rng.uniform(-0.5, 0.5);

  std::vector<double> x(layer_dims.front());
  ForwardCache cache;
  for (int attempt = 0;; ++attempt) {
    for (auto& xi : x) xi = rng.normal();
    forward_into(params, act, x, cache);
    if (act != Activation::Relu || attempt >= 1000) break;
    bool near_kink = false;
    for (std::size_t k = 0; k + 1 < cache.pre.size(); ++k)
      for (double z : cache.pre[k]) near_kink = near_kink || std::abs(z) < 1e-3;
    if (!near_kink) break;
  }
  const ParamSet analytic = backward(params, act, cache, 1.0);

  std::vector<double*> slots;
  params.for_each_block([&](std::span<double> b) {
    for (auto& v : b) slots.push_back(&v);
  });
  std::vector<double> flat;
  analytic.for_each_block([&](std::span<const double> b) { flat.insert(flat.end(), b.begin(), b.end()); });

  ForwardCache scratch;
  double worst = 0.0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const double saved = *slots[i];
    *slots[i] = saved + step;
    const double up = forward_into(params, act, x, scratch);
    *slots[i] = saved - step;
    const double down = forward_into(params, act, x, scratch);
    *slots[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double err = std::abs(flat[i] - numeric) / std::max(1e-8, std::abs(flat[i]) + std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

inline double grad_check(const std::vector<std::size_t>& layer_dims, std::uint64_t seed,
                         Activation act = Activation::Tanh, double step = 1e-5) {
  return grad_check(std::span<const std::size_t>(layer_dims), seed, act, step);
}

}  // namespace trendlab
