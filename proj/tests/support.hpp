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

// Shared test helpers: scratch directories, error-code assertions and
// brute-force reference implementations kept independent of the library.

#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "trendlab/error.hpp"

namespace trendlab::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("trendlab-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

/// Runs fn and returns the code of the trendlab::Error it throws, or nullopt.
inline std::optional<Errc> error_code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline std::string error_message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

// Brute-force oracles -------------------------------------------------------

/// Mann-Kendall S by counting increasing and decreasing pairs separately.
inline long long brute_mk_s(const std::vector<double>& x) {
  long long up = 0, down = 0;
  for (std::size_t j = 0; j < x.size(); ++j)
    for (std::size_t i = 0; i < j; ++i) {
      if (x[j] > x[i]) ++up;
      if (x[j] < x[i]) ++down;
    }
  return up - down;
}

/// Harrell's C over ordered (shorter, longer) pairs, counting in halves so the
/// result is an exact ratio of integers.
inline double brute_ci(const std::vector<double>& risk, const std::vector<double>& time, const std::vector<int>& event) {
  long long halves = 0, comparable = 0;
  for (std::size_t a = 0; a < time.size(); ++a)
    for (std::size_t b = 0; b < time.size(); ++b) {
      if (!(time[a] < time[b]) || event[a] != 1) continue;
      ++comparable;
      if (risk[a] > risk[b]) halves += 2;
      else if (risk[a] == risk[b]) halves += 1;
    }
  return comparable == 0 ? std::nan("") : static_cast<double>(halves) / (2.0 * static_cast<double>(comparable));
}

/// Ranks by counting smaller and equal values; ties get the mean rank.
inline std::vector<double> brute_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline double brute_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
  }
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - sa / n) * (b[i] - sb / n);
    va += (a[i] - sa / n) * (a[i] - sa / n);
    vb += (b[i] - sb / n) * (b[i] - sb / n);
  }
  return cov / std::sqrt(va * vb);
}

}  // namespace trendlab::testing
