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

#pragma once

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "trendlab/dataset.hpp"
#include "trendlab/detail/text.hpp"
#include "trendlab/error.hpp"
#include "trendlab/neural.hpp"

namespace trendlab {

/// Trained trend extractor: network, linear head and the feature
/// normalization it was trained with. score(x) = beta . F(norm(x)).
struct EmbeddingModel {
  static constexpr int kFormatVersion = 1;

  ParamSet params;
  Activation activation = Activation::Tanh;
  std::vector<double> norm_mean;
  std::vector<double> norm_std;
  int format_version = kFormatVersion;

  bool operator==(const EmbeddingModel&) const = default;

  std::vector<std::size_t> layer_dims() const { return params.layer_dims(); }
  std::size_t input_dim() const { return params.input_dim(); }

  /// Identity normalization; used for freshly initialized models.
  static EmbeddingModel untrained(const std::vector<std::size_t>& layer_dims, std::uint64_t seed,
                                  Activation act = Activation::Tanh) {
    EmbeddingModel m;
    m.params = init_params(layer_dims, seed);
    m.activation = act;
    m.norm_mean.assign(layer_dims.front(), 0.0);
    m.norm_std.assign(layer_dims.front(), 1.0);
    return m;
  }

  void validate() const {
    if (format_version != kFormatVersion)
      throw Error(Errc::VersionMismatch, "format_version " + std::to_string(format_version));
    const auto dims = layer_dims();
    check_layer_dims(dims);
    for (const auto& l : params.layers)
      if (l.weight.size() != l.in * l.out || l.bias.size() != l.out)
        throw Error(Errc::ShapeMismatch, "layer arrays inconsistent with layer_dims");
    for (std::size_t k = 1; k < params.layers.size(); ++k)
      if (params.layers[k].in != params.layers[k - 1].out)
        throw Error(Errc::ShapeMismatch, "layer chain broken at layer " + std::to_string(k + 1));
    if (params.beta.size() != dims.back()) throw Error(Errc::ShapeMismatch, "beta length differs from embedding width");
    if (norm_mean.size() != dims.front() || norm_std.size() != dims.front())
      throw Error(Errc::ShapeMismatch, "normalization vectors differ from input width");
    for (double s : norm_std)
      if (!(s > 0.0)) throw Error(Errc::ShapeMismatch, "norm_std entries must be positive");
    bool finite = true;
    params.for_each_block([&](std::span<const double> b) {
      for (double v : b) finite = finite && std::isfinite(v);
    });
    if (!finite || !detail::all_finite(norm_mean) || !detail::all_finite(norm_std))
      throw Error(Errc::NonFiniteValue, "model contains non-finite parameters");
  }

  void normalize_into(std::span<const double> raw, std::vector<double>& out) const {
    if (raw.size() != norm_mean.size())
      throw Error(Errc::DimensionMismatch,
                  "sample has " + std::to_string(raw.size()) + " features, model expects " + std::to_string(norm_mean.size()));
    out.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (!std::isfinite(raw[i])) throw Error(Errc::NonFiniteInput, "feature " + std::to_string(i) + " is not finite");
      out[i] = (raw[i] - norm_mean[i]) / norm_std[i];
    }
  }

  std::vector<double> normalize(std::span<const double> raw) const {
    std::vector<double> out;
    normalize_into(raw, out);
    return out;
  }

  /// Trend score of one raw (unnormalized) feature vector.
  double score(std::span<const double> raw) const {
    ForwardCache cache;
    return forward_into(params, activation, normalize(raw), cache);
  }
};

// Model file: one `key = value` per line, arrays space-separated, reals with
// 17 significant digits. Weights are row-major (fan_out x fan_in); layer
// numbering starts at 1.

inline void write_model(const EmbeddingModel& model, std::ostream& out) {
  model.validate();
  auto put_array = [&](const std::string& key, std::span<const double> values) {
    out << key << " =";
    for (double v : values) out << ' ' << detail::format_real(v);
    out << '\n';
  };
  out << "# trendlab embedding model\n";
  out << "format_version = " << model.format_version << '\n';
  out << "layer_dims =";
  for (auto d : model.layer_dims()) out << ' ' << d;
  out << '\n';
  out << "activation = " << to_string(model.activation) << '\n';
  for (std::size_t k = 0; k < model.params.layers.size(); ++k) {
    put_array("W" + std::to_string(k + 1), model.params.layers[k].weight);
    put_array("b" + std::to_string(k + 1), model.params.layers[k].bias);
  }
  put_array("beta", model.params.beta);
  put_array("norm_mean", model.norm_mean);
  put_array("norm_std", model.norm_std);
}

inline void serialize_model(const EmbeddingModel& model, const std::string& path) {
  auto out = detail::open_for_write(path);
  write_model(model, out);
  if (!out) throw Error(Errc::Io, "write to '" + path + "' failed");
}

inline EmbeddingModel parse_model(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw Error(Errc::ShapeMismatch, detail::at_line(line_no) + ": expected 'key = value'");
    kv[std::string(detail::trim(body.substr(0, eq)))] = std::string(detail::trim(body.substr(eq + 1)));
  }

  auto it = kv.find("format_version");
  if (it == kv.end()) throw Error(Errc::VersionMismatch, "format_version missing");
  const auto version = detail::parse_integer(it->second);
  if (!version || *version != EmbeddingModel::kFormatVersion)
    throw Error(Errc::VersionMismatch, "unsupported format_version '" + it->second + "'");

  auto require = [&](const std::string& key) -> const std::string& {
    auto found = kv.find(key);
    if (found == kv.end()) throw Error(Errc::ShapeMismatch, "key '" + key + "' missing");
    return found->second;
  };
  auto reals = [&](const std::string& key, std::size_t expected) {
    std::vector<double> values;
    for (auto tok : detail::tokens(require(key))) {
      auto v = detail::parse_real(tok);
      if (!v) throw Error(Errc::ShapeMismatch, "key '" + key + "': bad number '" + std::string(tok) + "'");
      values.push_back(*v);
    }
    if (values.size() != expected)
      throw Error(Errc::ShapeMismatch, "key '" + key + "' has " + std::to_string(values.size()) + " values, expected " +
                                           std::to_string(expected));
    return values;
  };

  std::vector<std::size_t> dims;
  for (auto tok : detail::tokens(require("layer_dims"))) {
    auto v = detail::parse_integer(tok);
    if (!v || *v < 0) throw Error(Errc::ShapeMismatch, "bad layer width '" + std::string(tok) + "'");
    dims.push_back(static_cast<std::size_t>(*v));
  }
  check_layer_dims(dims);

  EmbeddingModel m;
  m.format_version = static_cast<int>(*version);
  m.activation = parse_activation(require("activation"));
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    Dense l;
    l.in = dims[k];
    l.out = dims[k + 1];
    l.weight = reals("W" + std::to_string(k + 1), l.in * l.out);
    l.bias = reals("b" + std::to_string(k + 1), l.out);
    m.params.layers.push_back(std::move(l));
  }
  if (kv.contains("W" + std::to_string(dims.size())))
    throw Error(Errc::ShapeMismatch, "more weight arrays than layer_dims describes");
  m.params.beta = reals("beta", dims.back());
  m.norm_mean = reals("norm_mean", dims.front());
  m.norm_std = reals("norm_std", dims.front());
  m.validate();
  return m;
}

inline EmbeddingModel deserialize_model(const std::string& path) {
  auto in = detail::open_for_read(path);
  return parse_model(in);
}

}  // namespace trendlab
