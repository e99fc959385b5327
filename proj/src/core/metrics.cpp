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

#include "kiro/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kiro/error.hpp"

namespace kiro::metrics {
namespace {

// Neumaier-compensated accumulator; plain summation drifts by ~n ulp over the
// 200-key supports the indicators see.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace

double ProbabilityDistribution::probability(const std::string& key) const noexcept {
  auto it = entries_.find(key);
  return it == entries_.end() ? 0.0 : it->second;
}

ProbabilityDistribution ProbabilityDistribution::from_probabilities(
    std::map<std::string, double> probabilities) {
  CompensatedSum total;
  for (auto it = probabilities.begin(); it != probabilities.end();) {
    const double p = it->second;
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      fail(ErrorCode::InvalidArgument, "probability out of [0,1] for key '" + it->first + "'");
    }
    total.add(p);
    it = p == 0.0 ? probabilities.erase(it) : std::next(it);
  }
  if (probabilities.empty()) fail(ErrorCode::EmptyDistribution, "distribution has no mass");
  if (std::abs(total.value() - 1.0) > 1e-9) {
    fail(ErrorCode::InvalidArgument, "probabilities do not sum to 1");
  }
  return ProbabilityDistribution(std::move(probabilities));
}

double EntropyValue::in_base() const noexcept {
  return base == LogBase::Two ? nats / std::numbers::ln2 : nats;
}

ProbabilityDistribution normalize(const std::map<std::string, double>& magnitudes) {
  CompensatedSum total;
  for (const auto& [key, m] : magnitudes) {
    if (!std::isfinite(m) || m < 0.0) {
      fail(ErrorCode::InvalidArgument, "negative or non-finite magnitude for key '" + key + "'");
    }
    total.add(m);
  }
  const double sum = total.value();
  if (!(sum > 0.0)) fail(ErrorCode::EmptyDistribution, "all magnitudes are zero");

  std::map<std::string, double> probabilities;
  for (const auto& [key, m] : magnitudes) {
    if (m > 0.0) probabilities.emplace(key, m / sum);
  }
  return ProbabilityDistribution(std::move(probabilities));
}

EntropyValue shannon_entropy(const ProbabilityDistribution& dist, LogBase base) {
  CompensatedSum s;
  for (const auto& [key, p] : dist.entries()) {
    if (p > 0.0) s.add(-p * std::log(p));
  }
  // A single-key support is exactly zero; rounding must not push it negative.
  return EntropyValue{std::max(0.0, s.value()), dist.support_size(), base};
}

std::optional<double> ratio(std::uint64_t numerator, std::uint64_t denominator) noexcept {
  if (denominator == 0) return std::nullopt;
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

std::optional<double> editing_depth(std::uint64_t edits, std::uint64_t articles,
                                    std::uint64_t total_pages, double stub_ratio) {
  if (total_pages < articles) fail(ErrorCode::InvalidArgument, "total_pages < articles");
  if (!(stub_ratio >= 0.0 && stub_ratio <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "stub_ratio outside [0,1]");
  }
  if (articles == 0) return std::nullopt;
  const double a = static_cast<double>(articles);
  const double edits_per_article = static_cast<double>(edits) / a;
  const double non_articles_per_article = static_cast<double>(total_pages - articles) / a;
  return edits_per_article * non_articles_per_article * (1.0 - stub_ratio);
}

DemocraticScore democratic_quality_score(const ProbabilityDistribution& dist,
                                         const std::map<std::string, double>& index) {
  for (const auto& [country, d] : index) {
    if (!(d >= 0.0 && d <= 1.0)) {
      fail(ErrorCode::InvalidArgument, "democracy index score outside [0,1] for " + country);
    }
  }
  CompensatedSum covered;
  CompensatedSum weighted;
  for (const auto& [country, p] : dist.entries()) {
    auto it = index.find(country);
    if (it == index.end()) continue;
    covered.add(p);
    weighted.add(p * it->second);
  }
  DemocraticScore out;
  out.coverage = std::clamp(covered.value(), 0.0, 1.0);
  if (covered.value() > 0.0) out.score = std::clamp(weighted.value() / covered.value(), 0.0, 1.0);
  return out;
}

double percentile_rank(double value, std::span<const double> cohort) {
  if (cohort.empty()) fail(ErrorCode::EmptyCohort, "percentile of an empty cohort");
  if (std::isnan(value)) fail(ErrorCode::InvalidArgument, "percentile of NaN");
  std::size_t below = 0;
  std::size_t at_or_below = 0;
  for (double c : cohort) {
    if (c < value) ++below;
    if (c <= value) ++at_or_below;
  }
  return (static_cast<double>(below) + static_cast<double>(at_or_below)) /
         (2.0 * static_cast<double>(cohort.size()));
}

LinearFit linear_fit(std::span<const Point> points) {
  if (points.size() < 2) fail(ErrorCode::DegenerateFit, "linear fit needs at least two points");
  const double n = static_cast<double>(points.size());
  CompensatedSum sx, sy;
  double max_abs_x = 0.0;
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      fail(ErrorCode::InvalidArgument, "non-finite point in linear fit");
    }
    sx.add(p.x);
    sy.add(p.y);
    max_abs_x = std::max(max_abs_x, std::abs(p.x));
  }
  const double mean_x = sx.value() / n;
  const double mean_y = sy.value() / n;

  CompensatedSum sxx, sxy, syy;
  for (const auto& p : points) {
    const double dx = p.x - mean_x;
    const double dy = p.y - mean_y;
    sxx.add(dx * dx);
    sxy.add(dx * dy);
    syy.add(dy * dy);
  }
  const double scale = 1e-14 * std::max(1.0, max_abs_x);
  if (sxx.value() <= n * scale * scale) {
    fail(ErrorCode::DegenerateFit, "x has zero variance");
  }

  LinearFit fit;
  fit.n_points = points.size();
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = mean_y - fit.slope * mean_x;

  CompensatedSum ss_res;
  for (const auto& p : points) {
    const double r = p.y - (fit.intercept + fit.slope * p.x);
    ss_res.add(r * r);
  }
  const double ss_tot = syy.value();
  fit.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res.value() / ss_tot, 0.0, 1.0) : 1.0;
  return fit;
}

}  // namespace kiro::metrics
