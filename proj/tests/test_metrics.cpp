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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "kiro/error.hpp"
#include "kiro/metrics.hpp"

namespace kiro::metrics {
namespace {

// Oracle values computed once with an independent direct summation and frozen.
constexpr double kEntropy_03_06_01 = 0.8979457248567797;
constexpr double kLn4 = 1.3862943611198906;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

TEST(Normalize, DividesByTotal) {
  const auto d = normalize({{"A", 30}, {"B", 60}, {"C", 10}});
  EXPECT_DOUBLE_EQ(d.probability("A"), 0.3);
  EXPECT_DOUBLE_EQ(d.probability("B"), 0.6);
  EXPECT_DOUBLE_EQ(d.probability("C"), 0.1);
  EXPECT_EQ(d.support_size(), 3u);
}

TEST(Normalize, SingleSupportIsPointMass) {
  EXPECT_DOUBLE_EQ(normalize({{"A", 5}}).probability("A"), 1.0);
}

TEST(Normalize, AllZeroIsEmptyDistribution) {
  EXPECT_EQ(code_of([] { normalize({{"A", 0}, {"B", 0}}); }), ErrorCode::EmptyDistribution);
  EXPECT_EQ(code_of([] { normalize({}); }), ErrorCode::EmptyDistribution);
}

TEST(Normalize, RejectsNegativeAndNonFinite) {
  EXPECT_EQ(code_of([] { normalize({{"A", -1}, {"B", 2}}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { normalize({{"A", NAN}}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { normalize({{"A", INFINITY}}); }), ErrorCode::InvalidArgument);
}

TEST(Normalize, ZeroMassKeysAreDropped) {
  const auto d = normalize({{"A", 0}, {"B", 4}});
  EXPECT_EQ(d.support_size(), 1u);
  EXPECT_DOUBLE_EQ(d.probability("A"), 0.0);
}

TEST(ShannonEntropy, UniformOverFourIsLnFour) {
  const auto e = shannon_entropy(normalize({{"A", 1}, {"B", 1}, {"C", 1}, {"D", 1}}));
  EXPECT_NEAR(e.nats, kLn4, 1e-12);
  EXPECT_EQ(e.support_size, 4u);
}

TEST(ShannonEntropy, PointMassIsZero) {
  EXPECT_EQ(shannon_entropy(normalize({{"A", 1.0}})).nats, 0.0);
}

TEST(ShannonEntropy, MatchesFrozenOracle) {
  EXPECT_NEAR(shannon_entropy(normalize({{"A", 0.3}, {"B", 0.6}, {"C", 0.1}})).nats, kEntropy_03_06_01, 1e-12);
}

TEST(ShannonEntropy, BaseTwoIsRecordedAndConverted) {
  const auto e = shannon_entropy(normalize({{"A", 1}, {"B", 1}}), LogBase::Two);
  EXPECT_EQ(e.base, LogBase::Two);
  EXPECT_NEAR(e.nats, std::log(2.0), 1e-15);
  EXPECT_NEAR(e.in_base(), 1.0, 1e-15);
}

TEST(ShannonEntropy, NeverNegativeForNearPointMass) {
  const auto e = shannon_entropy(normalize({{"A", 1e300}, {"B", 1e-300}}));
  EXPECT_GE(e.nats, 0.0);
}

TEST(FromProbabilities, RejectsUnnormalizedInput) {
  EXPECT_EQ(code_of([] { ProbabilityDistribution::from_probabilities({{"A", 0.5}, {"B", 0.6}}); }),
            ErrorCode::InvalidArgument);
  EXPECT_NO_THROW(ProbabilityDistribution::from_probabilities({{"A", 0.25}, {"B", 0.75}}));
}

TEST(Ratio, Examples) {
  EXPECT_DOUBLE_EQ(*ratio(12, 4800), 0.0025);
  EXPECT_EQ(*ratio(0, 100), 0.0);
  EXPECT_FALSE(ratio(5, 0).has_value());
}

TEST(EditingDepth, HandComputedFactors) {
  // (1e6 / 1e5) * ((3e5 - 1e5) / 1e5) * (1 - 0.5) = 10 * 2 * 0.5
  EXPECT_DOUBLE_EQ(*editing_depth(1'000'000, 100'000, 300'000, 0.5), 10.0);
}

TEST(EditingDepth, AllStubsIsZeroAndNoArticlesIsAbsent) {
  EXPECT_EQ(*editing_depth(1'000'000, 100'000, 300'000, 1.0), 0.0);
  EXPECT_FALSE(editing_depth(10, 0, 10, 0.2).has_value());
}

TEST(EditingDepth, RejectsInconsistentInputs) {
  EXPECT_EQ(code_of([] { editing_depth(10, 100, 50, 0.1); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { editing_depth(10, 100, 500, 1.5); }), ErrorCode::InvalidArgument);
}

TEST(DemocraticScore, PointMass) {
  const auto s = democratic_quality_score(normalize({{"X", 1}}), {{"X", 0.8}});
  EXPECT_DOUBLE_EQ(*s.score, 0.8);
  EXPECT_DOUBLE_EQ(s.coverage, 1.0);
}

TEST(DemocraticScore, Symmetry) {
  const auto s = democratic_quality_score(normalize({{"X", 1}, {"Y", 1}}), {{"X", 1.0}, {"Y", 0.0}});
  EXPECT_DOUBLE_EQ(*s.score, 0.5);
  EXPECT_DOUBLE_EQ(s.coverage, 1.0);
}

TEST(DemocraticScore, RenormalizesOverCoveredMass) {
  // (0.5*0.8 + 0.25*0.4) / 0.75
  const auto s =
      democratic_quality_score(normalize({{"X", 0.5}, {"Y", 0.25}, {"Z", 0.25}}), {{"X", 0.8}, {"Y", 0.4}});
  EXPECT_NEAR(s.coverage, 0.75, 1e-12);
  EXPECT_NEAR(*s.score, 0.6666666666666666, 1e-9);
}

TEST(DemocraticScore, NoCoverageIsAbsent) {
  const auto s = democratic_quality_score(normalize({{"X", 1}}), {{"Y", 0.4}});
  EXPECT_FALSE(s.score.has_value());
  EXPECT_EQ(s.coverage, 0.0);
}

TEST(PercentileRank, Midrank) {
  const std::vector<double> cohort{1, 2, 5, 9};
  EXPECT_DOUBLE_EQ(percentile_rank(5, cohort), 0.625);
  EXPECT_DOUBLE_EQ(percentile_rank(1, cohort), 0.125);
  const std::vector<double> single{3.0};
  EXPECT_DOUBLE_EQ(percentile_rank(3.0, single), 0.5);
}

TEST(PercentileRank, EmptyCohortThrows) {
  EXPECT_EQ(code_of([] { percentile_rank(1.0, std::vector<double>{}); }), ErrorCode::EmptyCohort);
}

TEST(LinearFit, ExactLine) {
  const std::vector<Point> pts{{0, 0}, {1, 1}, {2, 2}};
  const auto f = linear_fit(pts);
  EXPECT_NEAR(f.slope, 1.0, 1e-12);
  EXPECT_NEAR(f.intercept, 0.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_EQ(f.n_points, 3u);
}

TEST(LinearFit, ConstantY) {
  const std::vector<Point> pts{{0, 1}, {1, 1}, {2, 1}};
  const auto f = linear_fit(pts);
  EXPECT_NEAR(f.slope, 0.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
}

TEST(LinearFit, ClosedFormOracle) {
  const std::vector<Point> pts{{0, 0}, {1, 2}, {2, 3}};
  const auto f = linear_fit(pts);
  EXPECT_NEAR(f.slope, 1.5, 1e-9);
  EXPECT_NEAR(f.intercept, 1.0 / 6.0, 1e-9);
}

TEST(LinearFit, DegenerateInputs) {
  EXPECT_EQ(code_of([] { linear_fit(std::vector<Point>{{1, 1}, {1, 2}}); }), ErrorCode::DegenerateFit);
  EXPECT_EQ(code_of([] { linear_fit(std::vector<Point>{{1, 1}}); }), ErrorCode::DegenerateFit);
}

TEST(LinearFit, RSquaredStaysInUnitInterval) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 200; ++i) {
    std::vector<Point> pts;
    for (int k = 0; k < 6; ++k) pts.push_back({u(rng), u(rng)});
    const auto f = linear_fit(pts);
    EXPECT_GE(f.r_squared, 0.0);
    EXPECT_LE(f.r_squared, 1.0);
  }
}

}  // namespace
}  // namespace kiro::metrics
