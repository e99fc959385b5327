/*
 * Copyright 2026 The KIRO Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Pure numerical building blocks of the indicator set. Nothing here does I/O
// and every function is reentrant.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kiro::metrics {

enum class LogBase { Natural, Two };

/// Normalized categorical distribution. Keys with zero mass are never stored
/// and the probabilities sum to one within 1e-9.
class ProbabilityDistribution {
 public:
  ProbabilityDistribution() = default;

  const std::map<std::string, double>& entries() const noexcept { return entries_; }
  std::size_t support_size() const noexcept { return entries_.size(); }
  double probability(const std::string& key) const noexcept;

  /// Validates and adopts already-normalized probabilities.
  static ProbabilityDistribution from_probabilities(std::map<std::string, double> probabilities);

 private:
  friend ProbabilityDistribution normalize(const std::map<std::string, double>& magnitudes);
  explicit ProbabilityDistribution(std::map<std::string, double> entries)
      : entries_(std::move(entries)) {}

  std::map<std::string, double> entries_;
};

struct EntropyValue {
  double nats = 0.0;  // always natural-log units, whatever `base` says
  std::size_t support_size = 0;
  LogBase base = LogBase::Natural;

  /// The entropy expressed in the configured base.
  double in_base() const noexcept;

  friend bool operator==(const EntropyValue&, const EntropyValue&) = default;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n_points = 0;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct DemocraticScore {
  std::optional<double> score;  // absent when no mass is covered by the index
  double coverage = 0.0;
};

/// p_k = m_k / sum(m). Throws EmptyDistribution when nothing has positive mass
/// and InvalidArgument on negative or non-finite magnitudes.
ProbabilityDistribution normalize(const std::map<std::string, double>& magnitudes);

/// S = -sum p ln p.
EntropyValue shannon_entropy(const ProbabilityDistribution& dist, LogBase base = LogBase::Natural);

std::optional<double> ratio(std::uint64_t numerator, std::uint64_t denominator) noexcept;

/// (edits/articles) * ((total_pages - articles)/articles) * (1 - stub_ratio).
std::optional<double> editing_depth(std::uint64_t edits, std::uint64_t articles,
                                    std::uint64_t total_pages, double stub_ratio);

/// Mass-weighted mean of per-country index scores, renormalized over the mass
/// the index covers.
DemocraticScore democratic_quality_score(const ProbabilityDistribution& dist,
                                         const std::map<std::string, double>& index);

/// Midrank percentile: (#{< value} + #{<= value}) / (2 |cohort|).
double percentile_rank(double value, std::span<const double> cohort);

/// Ordinary least squares of y on x.
LinearFit linear_fit(std::span<const Point> points);

}  // namespace kiro::metrics
