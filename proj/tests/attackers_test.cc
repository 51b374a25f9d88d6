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
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "hiddenfleet/attackers.h"
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

oracle::Ships ToOracle(const Layout& l) {
  oracle::Ships s;
  for (int i = 0; i < l.num_ships(); ++i) {
    auto c = l.ship_cells(i);
    std::sort(c.begin(), c.end());
    s.push_back(c);
  }
  return s;
}

// Oracle fleets consistent with a shot log, replaying outcomes by hand.
std::vector<oracle::Ships> ConsistentFleets(const std::vector<oracle::Ships>& fleets,
                                            const std::vector<Shot>& log) {
  std::vector<oracle::Ships> out;
  for (const auto& f : fleets) {
    std::uint32_t fired = 0;
    bool ok = true;
    for (const auto& s : log) {
      const int code = oracle::Outcome(f, fired, s.cell);
      const int want = s.outcome.kind == Observation::Kind::kMiss  ? 0
                       : s.outcome.kind == Observation::Kind::kHit ? 1
                                                                   : 2 + s.outcome.ship;
      if (code != want) ok = false;
      fired |= 1u << s.cell;
    }
    if (ok) out.push_back(f);
  }
  return out;
}

PublicState Play(const BoardConfig& b, const Layout& l, const std::vector<int>& cells) {
  PublicState s(b);
  for (int c : cells) s = Step(s, l, c).state;
  return s;
}

TEST(Random, UniformOverLegalActions) {
  const BoardConfig b = Board(3, 3, {2});
  const Layout l(b, {{4, Orientation::kHorizontal}});
  const PublicState s = Play(b, l, {0, 8});
  RandomPolicy p;
  std::map<int, int> counts;
  const int n = 14000;
  for (int i = 0; i < n; ++i) {
    p.Reset(i);
    counts[p.Act(s)]++;
  }
  EXPECT_EQ(counts.size(), 7u);
  for (const auto& [cell, k] : counts) {
    EXPECT_TRUE(s.IsLegal(cell));
    EXPECT_NEAR(k / double(n), 1.0 / 7, 0.015);
  }
}

TEST(Random, ExpectedShotsOnOneByThree) {
  // Ship on {0,1} or {1,2}: a uniformly random firing order needs 3 shots
  // unless the first two shots are the ship, which happens 1/3 of the time.
  const BoardConfig b = Board(1, 3, {2});
  const Layout l(b, {{0, Orientation::kHorizontal}});
  RandomPolicy p;
  double total = 0;
  const int n = 30000;
  for (int i = 0; i < n; ++i) total += Rollout(p, l, b, i).tau;
  EXPECT_NEAR(total / n, 2.0 / 3 * 3 + 1.0 / 3 * 2, 0.02);
}

TEST(ProbMap, ExactScoresCountConsistentLayouts) {
  const BoardConfig b = Board(4, 4, {3, 2});
  const auto fleets = oracle::AllFleets(4, 4, {3, 2});
  ProbMapPolicy p(b);
  ASSERT_TRUE(p.exact_mode());
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Layout l = SampleUniformLayout(b, rng);
    p.Reset(trial);
    PublicState s(b);
    while (!s.all_sunk()) {
      const int a = p.Act(s);
      const auto consistent = ConsistentFleets(fleets, s.log());
      std::vector<double> want(16, 0.0);
      for (const auto& f : consistent) {
        for (const auto& ship : f) {
          for (int c : ship) {
            if (!s.is_fired(c)) want[c] += 1;
          }
        }
      }
      ASSERT_EQ(p.last_scores(), want);
      ASSERT_TRUE(s.IsLegal(a));
      const double top = *std::max_element(want.begin(), want.end());
      EXPECT_EQ(want[a], top);
      s = Step(s, l, a).state;
    }
  }
}

TEST(ProbMap, StandardBoardPlaysLegallyAndFinishes) {
  const BoardConfig b = Board(10, 10, {5, 4, 3, 3, 2});
  ProbMapPolicy p(b);
  EXPECT_FALSE(p.exact_mode());
  EXPECT_EQ(p.id(), "probmap-parity");
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto ep = Rollout(p, SampleUniformLayout(b, rng), b, i);
    EXPECT_FALSE(ep.truncated);
    EXPECT_GE(ep.tau, 17);
    EXPECT_LT(ep.tau, 100);
  }
}

TEST(ProbMap, ParityHuntsOneColour) {
  const BoardConfig b = Board(10, 10, {5, 4, 3, 3, 2});
  ProbMapPolicy p(b);
  PublicState s(b);
  // With no hits the parity filter restricts hunting to one checkerboard colour.
  std::set<int> colours;
  Layout far(b, {{0, Orientation::kHorizontal}, {10, Orientation::kHorizontal},
                 {20, Orientation::kHorizontal}, {30, Orientation::kHorizontal},
                 {40, Orientation::kHorizontal}});
  for (int i = 0; i < 10; ++i) {
    const int a = p.Act(s);
    if (far.occupied(a)) break;
    colours.insert((b.row(a) + b.col(a)) % 2);
    s = Step(s, far, a).state;
  }
  EXPECT_EQ(colours.size(), 1u);
}

TEST(Particle, ParticlesStayConsistent) {
  const BoardConfig b = Board(6, 6, {3, 2, 2});
  ParticleOptions o;
  o.n_particles = 200;
  ParticlePolicy p(b, o);
  Rng rng(4);
  const Layout l = SampleUniformLayout(b, rng);
  p.Reset(1);
  PublicState s(b);
  while (!s.all_sunk()) {
    const int a = p.Act(s);
    ASSERT_TRUE(s.IsLegal(a));
    for (const auto& particle : p.particles()) ASSERT_TRUE(IsConsistent(particle, s));
    s = Step(s, l, a).state;
  }
}

TEST(Particle, MarginalsApproachExactPosterior) {
  const BoardConfig b = Board(5, 5, {3, 2});
  auto u = CachedLayoutSet(b);
  const auto prior = LatentDistribution::UniformOver(u);
  const Layout l(b, {{6, Orientation::kHorizontal}, {20, Orientation::kHorizontal}});
  const PublicState s = Play(b, l, {12, 0, 7, 24});
  const auto exact = ExactPosterior(s.log(), prior, b).Marginals();
  ParticleOptions o;
  o.n_particles = 4000;
  ParticlePolicy p(b, o);
  p.Reset(9);
  const auto approx = p.Marginals(s);
  double worst = 0;
  for (int c = 0; c < 25; ++c) worst = std::max(worst, std::abs(approx[c] - exact[c]));
  EXPECT_LT(worst, 0.06);
}

TEST(ExactPosterior, MatchesBayesByHand) {
  const BoardConfig b = Board(3, 3, {2});
  auto u = CachedLayoutSet(b);
  const auto fleets = oracle::AllFleets(3, 3, {2});
  std::vector<double> w(u->size());
  for (std::size_t z = 0; z < w.size(); ++z) w[z] = 1.0 + z;
  const auto prior = LatentDistribution::FromUnnormalized(u, w, "ramp");
  const Layout l(b, {{4, Orientation::kVertical}});
  const PublicState s = Play(b, l, {0, 4});
  const auto post = ExactPosterior(s.log(), prior, b);
  const auto keep = ConsistentFleets(fleets, s.log());
  double total = 0;
  for (std::size_t z = 0; z < u->size(); ++z) {
    if (std::find(keep.begin(), keep.end(), ToOracle((*u)[z])) != keep.end()) total += prior.weight(z);
  }
  for (std::size_t z = 0; z < u->size(); ++z) {
    const bool in = std::find(keep.begin(), keep.end(), ToOracle((*u)[z])) != keep.end();
    EXPECT_NEAR(post.weights[z], in ? prior.weight(z) / total : 0.0, 1e-12);
  }
  const auto support = post.Support();
  EXPECT_EQ(support.size(), keep.size());
}

TEST(ExactPosterior, ZeroPosteriorIsAnError) {
  const BoardConfig b = Board(1, 3, {2});
  auto u = CachedLayoutSet(b);
  const auto prior = LatentDistribution::PointMass(u, 0);  // ship on {0,1}
  std::vector<Shot> log = {{0, Observation::Miss()}};
  EXPECT_EQ(KindOf([&] { ExactPosterior(log, prior, b); }), ErrorKind::kZeroPosterior);
}

TEST(PolicyTable, HistoryKeyFormat) {
  std::vector<Shot> log = {{4, Observation::Hit()}, {3, Observation::Miss()},
                           {5, Observation::Sunk(0)}};
  EXPECT_EQ(HistoryKey(log), "4h,3m,5s0");
  EXPECT_EQ(HistoryKey({}), "-");
}

TEST(PolicyTable, WriteReadRoundTrip) {
  DeterministicPolicyTable t;
  t.Set("-", 1);
  t.Set("1h", 0);
  t.Set("1h,0m", 2);
  std::stringstream ss;
  t.Write(ss);
  EXPECT_EQ(DeterministicPolicyTable::Read(ss), t);
  EXPECT_EQ(KindOf([&] { t.Set("-", 2); }), ErrorKind::kInvalidArgument);
  EXPECT_NO_THROW(t.Set("-", 1));
}

TEST(PolicyTable, CorruptHashIsRejected) {
  DeterministicPolicyTable t;
  t.Set("1h", 0);
  std::stringstream ss;
  t.Write(ss);
  std::string text = ss.str();
  text[0] = text[0] == '0' ? '1' : '0';
  std::istringstream in(text);
  EXPECT_EQ(KindOf([&] { DeterministicPolicyTable::Read(in); }), ErrorKind::kIoError);
}

TEST(PolicyTable, UnmappedHistoryIsAViolation) {
  const BoardConfig b = Board(1, 3, {2});
  auto table = std::make_shared<DeterministicPolicyTable>();
  table->Set("-", 0);
  TablePolicy p(table, "t");
  PublicState s(b);
  EXPECT_EQ(p.Act(s), 0);
  s.Apply(0, Observation::Miss());
  EXPECT_EQ(KindOf([&] { p.Act(s); }), ErrorKind::kPolicyViolation);
}

TEST(PolicyTable, RecordingReproducesTheRecordedPolicy) {
  const BoardConfig b = Board(3, 3, {3, 2});
  auto u = CachedLayoutSet(b);
  ProbMapPolicy source(b);
  const auto table = std::make_shared<DeterministicPolicyTable>(RecordPolicyTable(source, *u));
  TablePolicy replay(table, "replay");
  for (std::size_t z = 0; z < u->size(); ++z) {
    const auto a = Rollout(source, (*u)[z], b, 0);
    const auto c = Rollout(replay, (*u)[z], b, 0);
    EXPECT_EQ(a.shot_log, c.shot_log);
  }
  RandomPolicy random;
  EXPECT_EQ(KindOf([&] { RecordPolicyTable(random, *u); }), ErrorKind::kInvalidArgument);
}

}  // namespace
}  // namespace hiddenfleet
