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

// Defender strategies: distributions over hidden layouts.

#ifndef HIDDENFLEET_DEFENDERS_H_
#define HIDDENFLEET_DEFENDERS_H_

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hiddenfleet/board.h"
#include "hiddenfleet/rng.h"

namespace hiddenfleet {

enum class Family { kUniform, kEdge, kCluster, kSpread, kParity };

std::string_view FamilyName(Family family);
// Accepts the upper-case tags (UNIFORM, EDGE, ...). Throws kInvalidArgument.
Family ParseFamily(std::string_view tag);
double DefaultStrength(Family family);

// A scripted latent family. The log-weight of a layout is
//   EDGE     strength * (fraction of ship cells on the outer ring)
//   CLUSTER -strength * (mean pairwise ship-centroid distance)
//   SPREAD  +strength * (mean pairwise ship-centroid distance)
//   PARITY   strength * (fraction of ship cells with even row+col)
//   UNIFORM  0
struct FamilySpec {
  Family family = Family::kUniform;
  double strength = 0.0;

  static FamilySpec Default(Family family) { return {family, DefaultStrength(family)}; }
  std::string id() const;
};

double FamilyScore(const FamilySpec& spec, const Layout& layout,
                   const BoardConfig& config);

struct SamplerSettings {
  int burn_in = 1000;
  int thinning = 10;
  std::int64_t enumeration_guard = kDefaultEnumerationGuard;
};

// Defender strategy. Explicit distributions carry dense weights over an
// enumerated LayoutSet; scored distributions are known up to normalization
// and are sampled exactly when the board is enumerable and by a Metropolis
// chain otherwise; mixtures of explicit components collapse to explicit.
// Values are immutable and cheap to copy.
class LatentDistribution {
 public:
  // Weights must be nonnegative and sum to 1 within 1e-9; they are
  // renormalized. Throws kWeightMismatch / kEmptySupport.
  static LatentDistribution Explicit(std::shared_ptr<const LayoutSet> universe,
                                     std::vector<double> weights, std::string id);
  static LatentDistribution FromUnnormalized(std::shared_ptr<const LayoutSet> universe,
                                             std::vector<double> weights,
                                             std::string id);
  static LatentDistribution PointMass(std::shared_ptr<const LayoutSet> universe,
                                      std::size_t index);
  static LatentDistribution UniformOver(std::shared_ptr<const LayoutSet> universe);
  static LatentDistribution Scored(const BoardConfig& config, FamilySpec spec,
                                   SamplerSettings sampler = {});
  // Throws kWeightMismatch unless weights form a simplex vector of matching
  // size.
  static LatentDistribution Mixture(std::vector<LatentDistribution> components,
                                    std::vector<double> weights);

  bool is_explicit() const;
  bool is_scored() const;
  bool is_mixture() const;
  const std::string& id() const;

  // Explicit only.
  const LayoutSet& universe() const;
  std::shared_ptr<const LayoutSet> universe_ptr() const;
  const std::vector<double>& weights() const;
  double weight(std::size_t index) const { return weights()[index]; }

  // Scored only.
  const FamilySpec& family() const;

  // Explicit form over the board's enumeration, or nullopt when the board is
  // over the guard.
  std::optional<LatentDistribution> Materialize(
      const BoardConfig& config, std::int64_t guard = kDefaultEnumerationGuard) const;

  // Deterministic given seed. Throws kEmptySupport.
  Layout Sample(const BoardConfig& config, std::uint64_t seed) const;
  // n draws. Scored distributions on non-enumerable boards use a single chain
  // with burn-in and thinning.
  std::vector<Layout> SampleMany(const BoardConfig& config, int n,
                                 std::uint64_t seed) const;

 private:
  struct ExplicitData;
  struct ScoredData;
  struct MixtureData;
  struct Impl;
  explicit LatentDistribution(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

// Uniformly random legal layout by whole-fleet rejection (exact).
Layout SampleUniformLayout(const BoardConfig& config, Rng& rng);

// Explicit weights read from CSV rows "layout_id,weight" (layout_id is the
// canonical index). Missing ids get weight 0.
LatentDistribution LoadExplicitWeightsCsv(std::istream& in,
                                          std::shared_ptr<const LayoutSet> universe,
                                          std::string id);

class DefenderPolytope {
 public:
  // Throws kInvalidArgument when empty, non-explicit, or the generators do not
  // share one universe.
  explicit DefenderPolytope(std::vector<LatentDistribution> generators);

  // Simplex over every point mass of the universe.
  static DefenderPolytope Simplex(std::shared_ptr<const LayoutSet> universe);

  const std::vector<LatentDistribution>& generators() const { return generators_; }
  std::size_t dimension() const { return universe().size(); }
  const LayoutSet& universe() const { return generators_.front().universe(); }
  std::shared_ptr<const LayoutSet> universe_ptr() const {
    return generators_.front().universe_ptr();
  }

 private:
  std::vector<LatentDistribution> generators_;
};

// Generators with exact duplicates removed, first occurrence kept.
std::vector<LatentDistribution> PolytopeExtremePoints(const DefenderPolytope& polytope);

struct ShiftMetrics {
  double centroid_dist_mean = 0.0;
  double cluster_score = 0.0;
  double marginal_entropy = 0.0;
  double quadrant_mass_std = 0.0;
  int sample_count = 0;
};

// Per-cell occupancy probabilities under the uniform layout law: exact on
// enumerable boards, otherwise a fixed-seed 200k-sample estimate. Cached.
const std::vector<double>& UniformReferenceMarginals(const BoardConfig& config);
inline constexpr int kUniformReferenceSamples = 200'000;
inline constexpr std::uint64_t kUniformReferenceSeed = 0x5eed0f0fULL;

// Requires n_samples >= 100. Explicit distributions are evaluated exactly;
// the UNIFORM family uses the cached reference marginals, so its centroid
// distance is exactly zero.
ShiftMetrics ComputeShiftMetrics(const LatentDistribution& dist,
                                 const BoardConfig& config, int n_samples,
                                 std::uint64_t seed);

// Marginal-based metrics from a marginal vector plus a cluster score.
ShiftMetrics ShiftMetricsFromMarginals(const std::vector<double>& marginals,
                                       double cluster_score,
                                       const BoardConfig& config, int sample_count);

// Count of 4-adjacent occupied cell pairs.
int AdjacentOccupiedPairs(const Layout& layout, const BoardConfig& config);

// Header: defender,CentroidDistMean,ClusterScore,MarginalEntropy,QuadrantMassStd
void WriteShiftMetricsCsv(std::ostream& out,
                          std::span<const std::pair<std::string, ShiftMetrics>> rows);

}  // namespace hiddenfleet

#endif  // HIDDENFLEET_DEFENDERS_H_
