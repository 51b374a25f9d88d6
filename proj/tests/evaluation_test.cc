// Copyright 2026 The hiddenfleet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "hiddenfleet/attackers.h"
#include "hiddenfleet/error.h"
#include "hiddenfleet/evaluation.h"

namespace hiddenfleet {
namespace {

BoardConfig Board(int h, int w, std::vector<int> ships, std::optional<int> cap = std::nullopt) {
  BoardConfig c;
  c.height = h;
  c.width = w;
  c.ship_lengths = std::move(ships);
  c.truncation_cap = cap;
  return c;
}

// Smallest sample value whose empirical CDF reaches 0.95, found by scanning.
double OracleP95(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (100 * (i + 1) >= 95 * x.size()) return x[i];
  }
  return x.back();
}

// Mean of the ceil(n/10) largest values.
double OracleCvar10(std::vector<double> x) {
  std::sort(x.rbegin(), x.rend());
  std::size_t k = 0;
  while (10 * k < x.size()) ++k;
  double s = 0;
  for (std::size_t i = 0; i < k; ++i) s += x[i];
  return s / k;
}

TEST(Estimators, MatchOrderStatisticOracles) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 400);
    std::vector<double> x(n);
    for (auto& v : x) v = static_cast<double>(17 + rng() % 84);
    EXPECT_EQ(EmpiricalP95(x), OracleP95(x));
    EXPECT_EQ(EmpiricalCvar10(x), OracleCvar10(x));
  }
}

TEST(Estimators, SmallCases) {
  EXPECT_EQ(EmpiricalP95(std::vector<double>{7}), 7);
  std::vector<double> x(20);
  for (int i = 0; i < 20; ++i) x[i] = i + 1;
  EXPECT_EQ(EmpiricalP95(x), 19);
  EXPECT_EQ(EmpiricalCvar10(x), 19.5);
  EXPECT_THROW(EmpiricalP95(std::vector<double>{}), Error);
}

TEST(Estimators, SummaryUsesSampleStd) {
  const auto r = SummarizeLengths({2, 4, 4, 4, 5, 5, 7, 9});
  EXPECT_DOUBLE_EQ(r.mean, 5.0);
  EXPECT_NEAR(r.std, std::sqrt(32.0 / 7), 1e-12);
}

TEST(DiscountedReturn, MatchesRewardSum) {
  double sum = 0;
  double g = 1;
  for (int t = 0; t < 100; ++t) {
    sum -= g;
    g *= 0.99;
  }
  EXPECT_NEAR(DiscountedReturn(100, 0.99), sum, 1e-12);
  EXPECT_EQ(DiscountedReturn(0, 0.5), 0.0);
  for (double bad : {0.0, 1.0, -0.1, 1.5}) {
    try {
      DiscountedReturn(10, bad);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kGammaOutOfRange);
    }
  }
}

TEST(DiscountedReturn, MonotoneInTau) {
  for (int t = 0; t < 100; ++t) EXPECT_GT(DiscountedReturn(t, 0.95), DiscountedReturn(t + 1, 0.95));
}

TEST(UndiscountedIdentity, HoldsAndRejectsTruncation) {
  const BoardConfig b = Board(4, 4, {3, 2});
  const BoardConfig capped = Board(4, 4, {3, 2}, 3);
  RandomPolicy p;
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const Layout l = SampleUniformLayout(b, rng);
    EXPECT_TRUE(UndiscountedIdentityCheck(Rollout(p, l, b, i)));
    const auto ep = Rollout(p, l, capped, i);
    ASSERT_TRUE(ep.truncated);
    EXPECT_THROW(UndiscountedIdentityCheck(ep), Error);
  }
}

TEST(Evaluate, DeterministicAndWorkerInvariant) {
  const BoardConfig b = Board(6, 6, {3, 2});
  const auto d = LatentDistribution::Scored(b, FamilySpec::Default(Family::kEdge));
  RandomPolicy p;
  const auto a = Evaluate(p, d, 64, b, 9, 1);
  const auto c = Evaluate(p, d, 64, b, 9, 4);
  EXPECT_EQ(a.lengths, c.lengths);
  EXPECT_EQ(a.policy_id, "random");
  EXPECT_NE(Evaluate(p, d, 64, b, 10, 1).lengths, a.lengths);
}

TEST(Evaluate, TruncatedEpisodesScoreTheHorizon) {
  const BoardConfig b = Board(5, 5, {3, 2}, 4);
  const auto d = LatentDistribution::Scored(b, {Family::kUniform, 0.0});
  RandomPolicy p;
  const auto r = Evaluate(p, d, 50, b, 1);
  EXPECT_EQ(r.truncated, 50);
  for (int t : r.lengths) EXPECT_EQ(t, 4);
}

TEST(Evaluate, RandomOnOneByThree) {
  const BoardConfig b = Board(1, 3, {2});
  const auto d = LatentDistribution::UniformOver(CachedLayoutSet(b));
  RandomPolicy p;
  const auto r = Evaluate(p, d, 20000, b, 4);
  EXPECT_NEAR(r.mean, 8.0 / 3, 0.02);
  EXPECT_EQ(r.p95, 3);
}

TEST(Gaps, DifferencesAndPolicyCheck) {
  auto nom = SummarizeLengths({1, 2, 3}, "p", "U");
  auto str = SummarizeLengths({2, 3, 4}, "p", "S");
  const auto g = RobustnessGaps(nom, str);
  EXPECT_DOUBLE_EQ(g.mean_gap, 1.0);
  EXPECT_DOUBLE_EQ(g.p95_gap, 1.0);
  EXPECT_DOUBLE_EQ(g.cvar_gap, 1.0);
  str.policy_id = "q";
  try {
    RobustnessGaps(nom, str);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPolicyMismatch);
  }
}

TEST(Hoeffding, RadiusFormula) {
  const std::vector<HoeffdingTerm> terms = {{50, 1.0}, {100, 1.0}};
  const double l = std::log(2 * 2 / 0.05);
  EXPECT_NEAR(HoeffdingRadius(terms, 100, 0.05),
              100 * std::sqrt(l / 100) + 100 * std::sqrt(l / 200), 1e-12);
  // T = 100, n = 50 and 100, delta = 0.05 gives a radius of about 35.7 shots.
  EXPECT_NEAR(HoeffdingRadius(terms, 100, 0.05), 35.7, 0.05);
  for (double bad : {0.0, 1.0, -1.0}) {
    try {
      HoeffdingRadius(terms, 100, bad);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kBadDelta);
    }
  }
}

TEST(Hoeffding, SignCertificationIsMagnitudeVersusRadius) {
  EXPECT_TRUE(CertifySign(-3.0, 2.0, 0.05).sign_certified);
  EXPECT_FALSE(CertifySign(2.0, 2.0, 0.05).sign_certified);
  EXPECT_FALSE(CertifySign(0.5, 2.0, 0.05).sign_certified);
  const auto c = CertifyDifference(50.0, {{50, 1.0}, {100, 1.0}}, 100, 0.05);
  EXPECT_TRUE(c.sign_certified);
  EXPECT_EQ(c.terms.size(), 2u);
}

// Coverage of the radius on synthetic bounded variables: each estimate is
// a mean of n draws in [0, T] with known expectation.
double Coverage(const std::vector<HoeffdingTerm>& terms, double delta, std::uint64_t seed) {
  const double t_max = 10.0;
  std::mt19937_64 rng(seed);
  const int reps = 2000;
  int covered = 0;
  const double radius = HoeffdingRadius(terms, t_max, delta);
  for (int r = 0; r < reps; ++r) {
    double err = 0;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      // Two-point law on {0, T} with p = 0.5 has the largest variance.
      std::bernoulli_distribution coin(0.5);
      double mean = 0;
      for (int i = 0; i < terms[k].n; ++i) mean += coin(rng) ? t_max : 0.0;
      mean /= terms[k].n;
      const double sign = k % 2 == 0 ? 1.0 : -1.0;
      err += sign * terms[k].weight * (mean - 0.5 * t_max);
    }
    covered += std::abs(err) <= radius;
  }
  return covered / double(reps);
}

TEST(Hoeffding, EmpiricalCoverage) {
  for (double delta : {0.05, 0.2}) {
    const double slack = 3 * std::sqrt(delta * (1 - delta) / 2000);
    const std::vector<HoeffdingTerm> two = {{50, 1.0}, {100, 1.0}};
    const std::vector<HoeffdingTerm> four = {{100, 0.5}, {50, 0.5}, {100, 0.5}, {100, 0.5}};
    EXPECT_GE(Coverage(two, delta, 1), 1 - delta - slack);
    EXPECT_GE(Coverage(four, delta, 2), 1 - delta - slack);
  }
}

TEST(MarginalDemo, ExactValues) {
  const auto d = MarginalInsufficiencyDemo();
  EXPECT_EQ(d.loss_plus, 0.0);
  EXPECT_EQ(d.loss_minus, 1.0);
  EXPECT_EQ(d.marginals_plus, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(d.marginals_minus, d.marginals_plus);
}

TEST(Csv, HeadersAndFixedFormatting) {
  std::vector<EvalReport> rs = {SummarizeLengths({1, 2}, "p", "U", 5)};
  std::ostringstream os;
  WriteEvalReportCsv(os, rs);
  EXPECT_EQ(os.str(), "policy,distribution,seed,n,mean,std,p95,cvar10,truncated\n"
                      "p,U,5,2,1.500000,0.707107,2.000000,2.000000,0\n");
  std::ostringstream ls;
  WriteLengthsCsv(ls, rs[0]);
  EXPECT_EQ(ls.str(), "episode,tau\n0,1\n1,2\n");
}

}  // namespace
}  // namespace hiddenfleet
