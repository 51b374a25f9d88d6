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


#include <cmath>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "hiddenfleet/defenders.h"
#include "hiddenfleet/error.h"
#include "oracles.h"

namespace hiddenfleet {
namespace {

BoardConfig Board(int h, int w, std::vector<int> ships) {
  BoardConfig c;
  c.height = h;
  c.width = w;
  c.ship_lengths = std::move(ships);
  return c;
}

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kInvalidArgument;
}

// Independent family scores on oracle fleets.
double OracleScore(Family f, double strength, const oracle::Ships& fleet, int h, int w) {
  double cells = 0;
  for (const auto& s : fleet) cells += s.size();
  auto centroid = [&](const std::vector<int>& s) {
    double r = 0, c = 0;
    for (int x : s) {
      r += x / w;
      c += x % w;
    }
    return std::make_pair(r / s.size(), c / s.size());
  };
  auto mean_pair_dist = [&] {
    double total = 0;
    int pairs = 0;
    for (std::size_t i = 0; i < fleet.size(); ++i) {
      for (std::size_t j = i + 1; j < fleet.size(); ++j) {
        auto a = centroid(fleet[i]);
        auto b = centroid(fleet[j]);
        total += std::sqrt((a.first - b.first) * (a.first - b.first) +
                           (a.second - b.second) * (a.second - b.second));
        ++pairs;
      }
    }
    return pairs ? total / pairs : 0.0;
  };
  switch (f) {
    case Family::kUniform:
      return 0;
    case Family::kEdge: {
      int edge = 0;
      for (const auto& s : fleet) {
        for (int x : s) edge += (x / w == 0 || x % w == 0 || x / w == h - 1 || x % w == w - 1);
      }
      return strength * edge / cells;
    }
    case Family::kCluster:
      return -strength * mean_pair_dist();
    case Family::kSpread:
      return strength * mean_pair_dist();
    case Family::kParity: {
      int even = 0;
      for (const auto& s : fleet) {
        for (int x : s) even += ((x / w + x % w) % 2 == 0);
      }
      return strength * even / cells;
    }
  }
  return 0;
}

// Maps a library layout to its index in the oracle fleet list.
std::size_t OracleIndex(const std::vector<oracle::Ships>& fleets, const Layout& l) {
  oracle::Ships s;
  for (int i = 0; i < l.num_ships(); ++i) {
    auto c = l.ship_cells(i);
    std::sort(c.begin(), c.end());
    s.push_back(c);
  }
  return std::find(fleets.begin(), fleets.end(), s) - fleets.begin();
}

TEST(Family, ParseAndNames) {
  for (auto f : {Family::kUniform, Family::kEdge, Family::kCluster, Family::kSpread,
                 Family::kParity}) {
    EXPECT_EQ(ParseFamily(FamilyName(f)), f);
  }
  EXPECT_THROW(ParseFamily("CORNER"), Error);
  EXPECT_EQ(FamilySpec::Default(Family::kEdge).id(), "EDGE(4)");
  EXPECT_EQ(FamilySpec::Default(Family::kUniform).id(), "UNIFORM");
}

TEST(Explicit, WeightValidation) {
  auto u = CachedLayoutSet(Board(1, 3, {2}));
  EXPECT_EQ(KindOf([&] { LatentDistribution::Explicit(u, {0.5}, "x"); }),
            ErrorKind::kWeightMismatch);
  EXPECT_EQ(KindOf([&] { LatentDistribution::Explicit(u, {1.5, -0.5}, "x"); }),
            ErrorKind::kWeightMismatch);
  EXPECT_EQ(KindOf([&] { LatentDistribution::Explicit(u, {0.5, 0.4}, "x"); }),
            ErrorKind::kWeightMismatch);
  EXPECT_EQ(KindOf([&] { LatentDistribution::Explicit(u, {0.0, 0.0}, "x"); }),
            ErrorKind::kEmptySupport);
  const auto d = LatentDistribution::Explicit(u, {0.25, 0.75}, "x");
  EXPECT_DOUBLE_EQ(d.weight(1), 0.75);
}

TEST(Explicit, SamplingFrequenciesMatchWeights) {
  auto u = CachedLayoutSet(Board(3, 3, {2}));
  std::vector<double> w(u->size(), 0.0);
  w[0] = 0.5;
  w[3] = 0.3;
  w[11] = 0.2;
  const auto d = LatentDistribution::Explicit(u, w, "w");
  std::vector<double> freq(u->size(), 0.0);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const Layout l = d.Sample(u->config(), DeriveSeed(5, {std::uint64_t(i)}));
    freq[u->IndexOf(l)] += 1.0 / n;
  }
  for (std::size_t z = 0; z < w.size(); ++z) EXPECT_NEAR(freq[z], w[z], 0.015);
}

TEST(Explicit, SampleIsDeterministicInSeed) {
  auto u = CachedLayoutSet(Board(3, 3, {2}));
  const auto d = LatentDistribution::UniformOver(u);
  EXPECT_EQ(d.Sample(u->config(), 77), d.Sample(u->config(), 77));
}

TEST(Explicit, WeightFileRoundTrip) {
  auto u = CachedLayoutSet(Board(3, 3, {2}));
  std::istringstream in("layout_id,weight\n2,1\n# comment\n5,3\n");
  const auto d = LoadExplicitWeightsCsv(in, u, "file");
  EXPECT_DOUBLE_EQ(d.weight(2), 0.25);
  EXPECT_DOUBLE_EQ(d.weight(5), 0.75);
  EXPECT_DOUBLE_EQ(d.weight(0), 0.0);
  std::istringstream bad("99,1\n");
  EXPECT_EQ(KindOf([&] { LoadExplicitWeightsCsv(bad, u, "bad"); }), ErrorKind::kWeightMismatch);
}

TEST(Scored, MaterializedWeightsMatchOracle) {
  const BoardConfig b = Board(3, 4, {2, 2});
  const auto fleets = oracle::AllFleets(3, 4, {2, 2});
  for (auto f : {Family::kEdge, Family::kCluster, Family::kSpread, Family::kParity}) {
    const auto d = LatentDistribution::Scored(b, FamilySpec::Default(f));
    const auto m = d.Materialize(b);
    ASSERT_TRUE(m.has_value());
    std::vector<double> want(fleets.size());
    double total = 0;
    for (std::size_t i = 0; i < fleets.size(); ++i) {
      want[i] = std::exp(OracleScore(f, DefaultStrength(f), fleets[i], 3, 4));
      total += want[i];
    }
    const LayoutSet& u = m->universe();
    for (std::size_t z = 0; z < u.size(); ++z) {
      EXPECT_NEAR(m->weight(z), want[OracleIndex(fleets, u[z])] / total, 1e-12);
    }
  }
}

TEST(Scored, UniformMaterializesToUniform) {
  const BoardConfig b = Board(3, 3, {2});
  const auto m = LatentDistribution::Scored(b, {Family::kUniform, 0.0}).Materialize(b);
  ASSERT_TRUE(m.has_value());
  for (std::size_t z = 0; z < m->universe().size(); ++z) EXPECT_DOUBLE_EQ(m->weight(z), 1.0 / 12);
}

TEST(Scored, NotMaterializableOverGuard) {
  const BoardConfig b = Board(10, 10, {5, 4, 3, 3, 2});
  EXPECT_FALSE(LatentDistribution::Scored(b, FamilySpec::Default(Family::kEdge)).Materialize(b));
}

// Total-variation distance of the Metropolis chain (forced by a tiny
// enumeration guard) from the exact tilted law computed by the oracle.
TEST(Scored, ChainTotalVariationIsSmall) {
  const BoardConfig b = Board(3, 4, {2, 2});
  const auto fleets = oracle::AllFleets(3, 4, {2, 2});
  for (auto f : {Family::kCluster, Family::kEdge}) {
    SamplerSettings s;
    s.enumeration_guard = 1;
    s.burn_in = 500;
    s.thinning = 5;
    const auto d = LatentDistribution::Scored(b, FamilySpec::Default(f), s);
    ASSERT_FALSE(d.Materialize(b).has_value());
    const int n = 40000;
    const auto draws = d.SampleMany(b, n, 2024);
    std::vector<double> freq(fleets.size(), 0.0);
    for (const auto& l : draws) freq[OracleIndex(fleets, l)] += 1.0 / n;
    std::vector<double> want(fleets.size());
    double total = 0;
    for (std::size_t i = 0; i < fleets.size(); ++i) {
      want[i] = std::exp(OracleScore(f, DefaultStrength(f), fleets[i], 3, 4));
      total += want[i];
    }
    double tv = 0;
    for (std::size_t i = 0; i < fleets.size(); ++i) tv += std::abs(freq[i] - want[i] / total) / 2;
    EXPECT_LT(tv, 0.05) << FamilyName(f);
  }
}

TEST(Scored, UniformRejectionSamplerMatchesEnumeration) {
  const BoardConfig b = Board(3, 4, {3, 2});
  auto u = CachedLayoutSet(b);
  std::vector<double> freq(u->size(), 0.0);
  Rng rng(11);
  const int n = 60000;
  for (int i = 0; i < n; ++i) freq[u->IndexOf(SampleUniformLayout(b, rng))] += 1.0 / n;
  double tv = 0;
  for (double p : freq) tv += std::abs(p - 1.0 / u->size()) / 2;
  EXPECT_LT(tv, 0.04);
}

TEST(Mixture, ExplicitComponentsBlend) {
  auto u = CachedLayoutSet(Board(1, 3, {2}));
  const auto a = LatentDistribution::PointMass(u, 0);
  const auto c = LatentDistribution::PointMass(u, 1);
  const auto m = LatentDistribution::Mixture({a, c}, {0.3, 0.7});
  ASSERT_TRUE(m.is_explicit());
  EXPECT_NEAR(m.weight(0), 0.3, 1e-15);
  EXPECT_NEAR(m.weight(1), 0.7, 1e-15);
  EXPECT_EQ(KindOf([&] { LatentDistribution::Mixture({a, c}, {0.3, 0.6}); }),
            ErrorKind::kWeightMismatch);
  EXPECT_EQ(KindOf([&] { LatentDistribution::Mixture({a}, {0.5, 0.5}); }),
            ErrorKind::kWeightMismatch);
}

TEST(Mixture, SampledMixtureOfScoredComponents) {
  const BoardConfig b = Board(10, 10, {5, 4, 3, 3, 2});
  const auto edge = LatentDistribution::Scored(b, FamilySpec::Default(Family::kEdge));
  const auto uni = LatentDistribution::Scored(b, {Family::kUniform, 0.0});
  const auto m = LatentDistribution::Mixture({edge, uni}, {0.5, 0.5});
  EXPECT_TRUE(m.is_mixture());
  const Layout l = m.Sample(b, 3);
  EXPECT_TRUE(IsLegalPlacementSet(b, l.placements()));
}

TEST(Polytope, ValidatesGenerators) {
  auto u = CachedLayoutSet(Board(1, 3, {2}));
  EXPECT_THROW(DefenderPolytope({}), Error);
  const BoardConfig big = Board(10, 10, {5});
  EXPECT_THROW(DefenderPolytope({LatentDistribution::Scored(big, FamilySpec::Default(Family::kEdge))}),
               Error);
  auto other = CachedLayoutSet(Board(2, 2, {2}));
  EXPECT_THROW(DefenderPolytope({LatentDistribution::PointMass(u, 0),
                                 LatentDistribution::PointMass(other, 0)}),
               Error);
  const auto p = DefenderPolytope::Simplex(u);
  EXPECT_EQ(p.generators().size(), 2u);
  EXPECT_EQ(p.dimension(), 2u);
}

TEST(Polytope, ExtremePointsDropDuplicates) {
  auto u = CachedLayoutSet(Board(1, 3, {2}));
  const DefenderPolytope p({LatentDistribution::PointMass(u, 0), LatentDistribution::PointMass(u, 1),
                            LatentDistribution::PointMass(u, 0)});
  EXPECT_EQ(PolytopeExtremePoints(p).size(), 2u);
}

TEST(ShiftMetrics, UniformAnchors) {
  const BoardConfig b = Board(10, 10, {5, 4, 3, 3, 2});
  const auto m = ComputeShiftMetrics(LatentDistribution::Scored(b, {Family::kUniform, 0.0}), b,
                                     20000, 1);
  EXPECT_EQ(m.centroid_dist_mean, 0.0);
  EXPECT_NEAR(m.marginal_entropy, 0.451, 0.02);
}

TEST(ShiftMetrics, ExactOnEnumerableBoardMatchesOracleMarginals) {
  const BoardConfig b = Board(3, 3, {2});
  auto u = CachedLayoutSet(b);
  const auto fleets = oracle::AllFleets(3, 3, {2});
  std::vector<double> w(u->size(), 0.0);
  w[0] = 1.0;
  const auto d = LatentDistribution::Explicit(u, w, "pm");
  const auto m = ComputeShiftMetrics(d, b, 100, 0);
  // Point mass: occupancy 0/1 so every cell contributes zero entropy.
  EXPECT_EQ(m.marginal_entropy, 0.0);
  // Uniform marginals by counting oracle fleets.
  std::vector<double> ref(9, 0.0);
  for (const auto& f : fleets) {
    for (int c : f[0]) ref[c] += 1.0 / fleets.size();
  }
  const auto& lib = UniformReferenceMarginals(b);
  for (int c = 0; c < 9; ++c) EXPECT_NEAR(lib[c], ref[c], 1e-15);
  double l1 = 0;
  for (int c = 0; c < 9; ++c) l1 += std::abs((u->layouts()[0].occupied(c) ? 1.0 : 0.0) - ref[c]);
  EXPECT_NEAR(m.centroid_dist_mean, l1 * 9 / (2.0 * 2), 1e-12);
}

TEST(ShiftMetrics, FamilyOrderingOnStandardBoard) {
  const BoardConfig b = Board(10, 10, {5, 4, 3, 3, 2});
  std::map<Family, ShiftMetrics> m;
  for (auto f : {Family::kUniform, Family::kEdge, Family::kCluster, Family::kSpread,
                 Family::kParity}) {
    m[f] = ComputeShiftMetrics(LatentDistribution::Scored(b, FamilySpec::Default(f)), b, 5000,
                               DeriveSeed(3, {std::uint64_t(f)}));
  }
  for (const auto& [f, x] : m) {
    if (f != Family::kCluster) {
      EXPECT_GT(m[Family::kCluster].cluster_score, x.cluster_score);
      EXPECT_LT(m[Family::kCluster].marginal_entropy, x.marginal_entropy);
    }
    if (f != Family::kSpread) {
      EXPECT_LT(m[Family::kSpread].cluster_score, x.cluster_score);
    }
  }
}

TEST(ShiftMetrics, CsvHeader) {
  std::ostringstream os;
  std::vector<std::pair<std::string, ShiftMetrics>> rows = {{"X", ShiftMetrics{}}};
  WriteShiftMetricsCsv(os, rows);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
            "defender,CentroidDistMean,ClusterScore,MarginalEntropy,QuadrantMassStd,samples");
}

}  // namespace
}  // namespace hiddenfleet
