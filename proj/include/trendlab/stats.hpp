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

// Trend and ranking statistics: Mann-Kendall, Spearman/Pearson correlation
// and Harrell's concordance index.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "trendlab/error.hpp"

namespace trendlab {

struct MKResult {
  std::int64_t S = 0;
  double normalized = 0.0;  ///< 2S / (n(n-1)), in [-1, 1]
  double z = 0.0;
  double p_two_sided = 1.0;
  std::size_t n = 0;

  /// Rejects "no trend" at two-sided level `alpha`.
  bool significant(double alpha = 0.05) const { return p_two_sided < alpha; }
};

inline double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

/// Mann-Kendall test. Positive S means an increasing series:
/// S = sum_{i<j} sign(x_j - x_i). Var(S) = n(n-1)(2n+5)/18 (no tie
/// correction); z uses a continuity correction and is 0 when S = 0.
inline MKResult mann_kendall(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 3) throw Error(Errc::SeriesTooShort, "Mann-Kendall needs at least 3 values, got " + std::to_string(n));
  for (double x : series)
    if (!std::isfinite(x)) throw Error(Errc::NonFiniteValue, "Mann-Kendall input contains a non-finite value");

  std::int64_t s = 0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) s += (series[j] > series[i]) - (series[j] < series[i]);

  MKResult r;
  r.n = n;
  r.S = s;
  const double nd = static_cast<double>(n);
  r.normalized = 2.0 * static_cast<double>(s) / (nd * (nd - 1.0));
  const double var = nd * (nd - 1.0) * (2.0 * nd + 5.0) / 18.0;
  if (s > 0)
    r.z = (static_cast<double>(s) - 1.0) / std::sqrt(var);
  else if (s < 0)
    r.z = (static_cast<double>(s) + 1.0) / std::sqrt(var);
  r.p_two_sided = std::clamp(normal_two_sided_p(r.z), 0.0, 1.0);
  return r;
}

/// 1-based ranks; ties share their mean rank.
inline std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + j + 1);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mean_rank;
    i = j;
  }
  return ranks;
}

enum class CorrelationKind { Spearman, Pearson };

inline double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::LengthMismatch, "correlation inputs differ in length");
  if (a.size() < 2) throw Error(Errc::LengthMismatch, "correlation needs at least 2 values");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw Error(Errc::ConstantVector, "correlation of a constant vector is undefined");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline double rank_correlation(std::span<const double> a, std::span<const double> b,
                               CorrelationKind kind = CorrelationKind::Spearman) {
  if (a.size() != b.size()) throw Error(Errc::LengthMismatch, "correlation inputs differ in length");
  if (kind == CorrelationKind::Pearson) return pearson(a, b);
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

/// Harrell's C. A pair is comparable when the times differ and the shorter
/// one is an observed event; it scores 1 if that record has the strictly
/// higher risk, 0.5 on tied risk.
inline double concordance_index(std::span<const double> risk, std::span<const double> time,
                                std::span<const int> event) {
  const std::size_t n = risk.size();
  if (time.size() != n || event.size() != n) throw Error(Errc::LengthMismatch, "risk, time and event lengths differ");
  for (double t : time)
    if (!(t > 0.0)) throw Error(Errc::NonPositiveTime, "survival times must be positive");
  double credit = 0.0;
  std::uint64_t comparable = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (event[i] != 1) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (!(time[i] < time[j])) continue;
      ++comparable;
      if (risk[i] > risk[j])
        credit += 1.0;
      else if (risk[i] == risk[j])
        credit += 0.5;
    }
  }
  if (comparable == 0) throw Error(Errc::NoComparablePairs, "no comparable pairs for concordance");
  return credit / static_cast<double>(comparable);
}

}  // namespace trendlab
