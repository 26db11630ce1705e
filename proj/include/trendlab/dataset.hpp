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

// Sequence and survival datasets and their CSV representations.
//
//   sequence CSV:  seq_id,t,f0,...,f{d-1}[,tau]
//   survival CSV:  id,time,event,f0,...,f{d-1}
//
// Reals are written with 17 significant digits so that write-then-read is
// value exact. Readers validate every invariant and reject the file with an
// Error naming the offending line rather than build an invalid dataset.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "trendlab/detail/text.hpp"
#include "trendlab/error.hpp"

namespace trendlab {

struct Sample {
  std::string seq_id;
  std::int64_t t = 0;
  std::vector<double> features;

  bool operator==(const Sample&) const = default;
};

struct SequenceDataset {
  std::map<std::string, std::vector<Sample>> sequences;
  std::size_t feature_dim = 0;
  /// Ground-truth trend per sample, aligned with `sequences`. Synthetic data only.
  std::optional<std::map<std::string, std::vector<double>>> trend_truth;

  bool operator==(const SequenceDataset&) const = default;

  std::size_t sample_count() const {
    std::size_t n = 0;
    for (const auto& [id, seq] : sequences) n += seq.size();
    return n;
  }
};

struct SurvivalRecord {
  std::string id;
  double time = 0.0;
  int event = 0;  ///< 1 = event observed, 0 = right-censored
  std::vector<double> features;

  bool operator==(const SurvivalRecord&) const = default;
};

struct SurvivalDataset {
  std::vector<SurvivalRecord> records;
  std::size_t feature_dim = 0;

  bool operator==(const SurvivalDataset&) const = default;

  double censoring_rate() const {
    if (records.empty()) return 0.0;
    std::size_t censored = 0;
    for (const auto& r : records) censored += (r.event == 0);
    return static_cast<double>(censored) / static_cast<double>(records.size());
  }
};

/// Whether a `tau` column must be non-decreasing within each sequence.
/// Contaminated datasets carry the clean trend with each (reordered) sample,
/// so their trend column is no longer sorted.
enum class TrendOrder { Monotone, Any };

struct ReadOptions {
  TrendOrder trend_order = TrendOrder::Monotone;
};

namespace detail {

inline std::string at_line(std::size_t line) { return "line " + std::to_string(line); }

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot open '" + path + "' for writing");
  return out;
}

// Reads the next non-blank line. Returns false at end of input.
inline bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) return true;
  }
  return false;
}

// Feature columns must be exactly f0..f{d-1} starting at `first`.
inline std::size_t count_feature_columns(const std::vector<std::string_view>& header,
                                         std::size_t first, std::size_t end) {
  std::size_t d = 0;
  for (std::size_t c = first; c < end; ++c, ++d) {
    if (trim(header[c]) != "f" + std::to_string(d))
      throw Error(Errc::MissingHeader, at_line(1) + ": expected column 'f" + std::to_string(d) +
                                           "', found '" + std::string(trim(header[c])) + "'");
  }
  return d;
}

inline double read_real_field(std::string_view field, std::size_t line_no) {
  auto v = parse_real(field);
  if (!v) throw Error(Errc::NonFiniteValue, at_line(line_no) + ": '" + std::string(field) + "' is not a number");
  if (!std::isfinite(*v))
    throw Error(Errc::NonFiniteValue, at_line(line_no) + ": non-finite value '" + std::string(field) + "'");
  return *v;
}

}  // namespace detail

/// Checks every SequenceDataset invariant; throws on the first violation.
inline void validate(const SequenceDataset& ds, TrendOrder order = TrendOrder::Monotone) {
  if (ds.feature_dim == 0) throw Error(Errc::InvalidDataset, "feature dimension must be positive");
  if (ds.sequences.empty()) throw Error(Errc::EmptyDataset, "dataset has no sequences");
  for (const auto& [id, seq] : ds.sequences) {
    if (seq.size() < 2)
      throw Error(Errc::SequenceTooShort, "sequence '" + id + "' has " + std::to_string(seq.size()) + " sample(s)");
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (seq[i].seq_id != id) throw Error(Errc::InvalidDataset, "sample filed under wrong sequence '" + id + "'");
      if (seq[i].features.size() != ds.feature_dim)
        throw Error(Errc::DimensionMismatch, "sequence '" + id + "' sample " + std::to_string(i) + " has wrong length");
      if (!detail::all_finite(seq[i].features))
        throw Error(Errc::NonFiniteValue, "sequence '" + id + "' sample " + std::to_string(i));
      if (i > 0 && seq[i].t <= seq[i - 1].t)
        throw Error(Errc::InvalidDataset, "sequence '" + id + "': time index not strictly increasing");
    }
  }
  if (ds.trend_truth) {
    if (ds.trend_truth->size() != ds.sequences.size())
      throw Error(Errc::InvalidDataset, "trend truth does not cover every sequence");
    for (const auto& [id, seq] : ds.sequences) {
      auto it = ds.trend_truth->find(id);
      if (it == ds.trend_truth->end() || it->second.size() != seq.size())
        throw Error(Errc::InvalidDataset, "trend truth misaligned for sequence '" + id + "'");
      if (!detail::all_finite(it->second)) throw Error(Errc::NonFiniteValue, "trend truth of '" + id + "'");
      if (order == TrendOrder::Monotone)
        for (std::size_t i = 1; i < it->second.size(); ++i)
          if (it->second[i] < it->second[i - 1])
            throw Error(Errc::InvalidDataset, "trend truth of '" + id + "' decreases");
    }
  }
}

inline void validate(const SurvivalDataset& ds) {
  if (ds.feature_dim == 0) throw Error(Errc::InvalidDataset, "feature dimension must be positive");
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    if (!(r.time > 0.0) || !std::isfinite(r.time))
      throw Error(Errc::NonPositiveTime, "record '" + r.id + "'");
    if (r.event != 0 && r.event != 1) throw Error(Errc::BadEventFlag, "record '" + r.id + "'");
    if (r.features.size() != ds.feature_dim) throw Error(Errc::DimensionMismatch, "record '" + r.id + "'");
    if (!detail::all_finite(r.features)) throw Error(Errc::NonFiniteValue, "record '" + r.id + "'");
  }
}

inline SequenceDataset parse_sequence_csv(std::istream& in, ReadOptions options = {}) {
  using namespace detail;
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no) || line_no != 1)
    throw Error(Errc::MissingHeader, "expected header 'seq_id,t,f0,...' on line 1");
  const auto header = split(line, ',');
  if (header.size() < 3 || trim(header[0]) != "seq_id" || trim(header[1]) != "t")
    throw Error(Errc::MissingHeader, at_line(1) + ": expected header 'seq_id,t,f0,...'");
  const bool has_tau = trim(header.back()) == "tau";
  const std::size_t n_cols = header.size();
  const std::size_t d = count_feature_columns(header, 2, n_cols - (has_tau ? 1 : 0));
  if (d == 0) throw Error(Errc::MissingHeader, at_line(1) + ": no feature columns");

  SequenceDataset ds;
  ds.feature_dim = d;
  std::map<std::string, std::vector<std::pair<Sample, double>>> rows;
  std::map<std::pair<std::string, std::int64_t>, std::size_t> seen;
  while (next_line(in, line, line_no)) {
    const auto fields = split(line, ',');
    if (fields.size() != n_cols)
      throw Error(Errc::RaggedRow, at_line(line_no) + ": expected " + std::to_string(n_cols) + " columns, found " +
                                       std::to_string(fields.size()));
    Sample s;
    s.seq_id = std::string(trim(fields[0]));
    if (s.seq_id.empty()) throw Error(Errc::InvalidDataset, at_line(line_no) + ": empty seq_id");
    const auto t = parse_integer(fields[1]);
    if (!t) throw Error(Errc::InvalidDataset, at_line(line_no) + ": time index '" + std::string(fields[1]) + "' is not an integer");
    s.t = *t;
    s.features.reserve(d);
    for (std::size_t c = 0; c < d; ++c) s.features.push_back(read_real_field(fields[2 + c], line_no));
    const double tau = has_tau ? read_real_field(fields.back(), line_no) : 0.0;
    auto [it, inserted] = seen.try_emplace({s.seq_id, s.t}, line_no);
    if (!inserted)
      throw Error(Errc::DuplicateTimeIndex, at_line(line_no) + ": (" + s.seq_id + ", " + std::to_string(s.t) +
                                                ") already defined on line " + std::to_string(it->second));
    rows[s.seq_id].emplace_back(std::move(s), tau);
  }

  if (has_tau) ds.trend_truth.emplace();
  for (auto& [id, seq] : rows) {
    std::stable_sort(seq.begin(), seq.end(), [](const auto& a, const auto& b) { return a.first.t < b.first.t; });
    auto& samples = ds.sequences[id];
    std::vector<double> taus;
    for (auto& [sample, tau] : seq) {
      samples.push_back(std::move(sample));
      taus.push_back(tau);
    }
    if (has_tau) (*ds.trend_truth)[id] = std::move(taus);
  }
  validate(ds, options.trend_order);
  return ds;
}

inline SequenceDataset read_sequence_dataset(const std::string& path, ReadOptions options = {}) {
  auto in = detail::open_for_read(path);
  return parse_sequence_csv(in, options);
}

inline void write_sequence_csv(const SequenceDataset& ds, std::ostream& out) {
  using detail::format_real;
  out << "seq_id,t";
  for (std::size_t c = 0; c < ds.feature_dim; ++c) out << ",f" << c;
  if (ds.trend_truth) out << ",tau";
  out << '\n';
  for (const auto& [id, seq] : ds.sequences) {
    const std::vector<double>* taus = ds.trend_truth ? &ds.trend_truth->at(id) : nullptr;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      out << id << ',' << seq[i].t;
      for (double x : seq[i].features) out << ',' << format_real(x);
      if (taus) out << ',' << format_real((*taus)[i]);
      out << '\n';
    }
  }
}

inline void write_sequence_dataset(const SequenceDataset& ds, const std::string& path) {
  auto out = detail::open_for_write(path);
  write_sequence_csv(ds, out);
  if (!out) throw Error(Errc::Io, "write to '" + path + "' failed");
}

inline SurvivalDataset parse_survival_csv(std::istream& in) {
  using namespace detail;
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no) || line_no != 1)
    throw Error(Errc::MissingHeader, "expected header 'id,time,event,f0,...' on line 1");
  const auto header = split(line, ',');
  if (header.size() < 4 || trim(header[0]) != "id" || trim(header[1]) != "time" || trim(header[2]) != "event")
    throw Error(Errc::MissingHeader, at_line(1) + ": expected header 'id,time,event,f0,...'");
  const std::size_t n_cols = header.size();
  SurvivalDataset ds;
  ds.feature_dim = count_feature_columns(header, 3, n_cols);

  while (next_line(in, line, line_no)) {
    const auto fields = split(line, ',');
    if (fields.size() != n_cols)
      throw Error(Errc::RaggedRow, at_line(line_no) + ": expected " + std::to_string(n_cols) + " columns, found " +
                                       std::to_string(fields.size()));
    SurvivalRecord r;
    r.id = std::string(trim(fields[0]));
    r.time = read_real_field(fields[1], line_no);
    if (!(r.time > 0.0)) throw Error(Errc::NonPositiveTime, at_line(line_no) + ": time must be > 0");
    const auto ev = parse_integer(fields[2]);
    if (!ev || (*ev != 0 && *ev != 1))
      throw Error(Errc::BadEventFlag, at_line(line_no) + ": event must be 0 or 1, found '" + std::string(fields[2]) + "'");
    r.event = static_cast<int>(*ev);
    r.features.reserve(ds.feature_dim);
    for (std::size_t c = 0; c < ds.feature_dim; ++c) r.features.push_back(read_real_field(fields[3 + c], line_no));
    ds.records.push_back(std::move(r));
  }
  validate(ds);
  return ds;
}

inline SurvivalDataset read_survival_dataset(const std::string& path) {
  auto in = detail::open_for_read(path);
  return parse_survival_csv(in);
}

inline void write_survival_csv(const SurvivalDataset& ds, std::ostream& out) {
  using detail::format_real;
  out << "id,time,event";
  for (std::size_t c = 0; c < ds.feature_dim; ++c) out << ",f" << c;
  out << '\n';
  for (const auto& r : ds.records) {
    out << r.id << ',' << format_real(r.time) << ',' << r.event;
    for (double x : r.features) out << ',' << format_real(x);
    out << '\n';
  }
}

inline void write_survival_dataset(const SurvivalDataset& ds, const std::string& path) {
  auto out = detail::open_for_write(path);
  write_survival_csv(ds, out);
  if (!out) throw Error(Errc::Io, "write to '" + path + "' failed");
}

/// Sidecar metadata lives next to a dataset: `name.csv` -> `name.meta.csv`.
inline std::string sidecar_path(const std::string& dataset_path) {
  constexpr std::string_view ext = ".csv";
  if (dataset_path.size() > ext.size() && dataset_path.ends_with(ext))
    return dataset_path.substr(0, dataset_path.size() - ext.size()) + ".meta.csv";
  return dataset_path + ".meta.csv";
}

/// Two-column `key,value` table (per-sequence alpha, per-record true risk).
struct Sidecar {
  std::string key_name;
  std::string value_name;
  std::vector<std::pair<std::string, double>> rows;
};

inline void write_sidecar(const Sidecar& meta, const std::string& path) {
  auto out = detail::open_for_write(path);
  out << meta.key_name << ',' << meta.value_name << '\n';
  for (const auto& [key, value] : meta.rows) out << key << ',' << detail::format_real(value) << '\n';
  if (!out) throw Error(Errc::Io, "write to '" + path + "' failed");
}

inline Sidecar read_sidecar(const std::string& path) {
  using namespace detail;
  auto in = open_for_read(path);
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw Error(Errc::MissingHeader, path + ": empty sidecar");
  const auto header = split(line, ',');
  if (header.size() != 2) throw Error(Errc::MissingHeader, path + ": expected two columns");
  Sidecar meta{std::string(trim(header[0])), std::string(trim(header[1])), {}};
  while (next_line(in, line, line_no)) {
    const auto fields = split(line, ',');
    if (fields.size() != 2) throw Error(Errc::RaggedRow, path + ": " + at_line(line_no));
    meta.rows.emplace_back(std::string(trim(fields[0])), read_real_field(fields[1], line_no));
  }
  return meta;
}

}  // namespace trendlab
