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

// Scripted attackers and exact belief tracking.

#ifndef HIDDENFLEET_ATTACKERS_H_
#define HIDDENFLEET_ATTACKERS_H_

#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hiddenfleet/board.h"
#include "hiddenfleet/defenders.h"
#include "hiddenfleet/policy.h"
#include "hiddenfleet/rng.h"

namespace hiddenfleet {

// Fires uniformly at random among unfired cells.
class RandomPolicy : public AttackerPolicy {
 public:
  void Reset(std::uint64_t seed) override { rng_.seed(seed); }
  int Act(const PublicState& state) override;
  bool deterministic() const override { return false; }
  std::unique_ptr<AttackerPolicy> Clone() const override {
    return std::make_unique<RandomPolicy>(*this);
  }
  std::string id() const override { return "random"; }

 private:
  Rng rng_;
};

struct ProbMapOptions {
  // Exact joint counting over enumerated layouts is used when the board has
  // at most this many layouts; otherwise ships are counted independently.
  std::int64_t placement_budget = 5000;
  // Hunt-mode checkerboard filter with spacing equal to the shortest unsunk
  // ship. Applies to independent counting only.
  bool parity = true;
  // Target-mode weight of a placement covering k unresolved hits is
  // target_base^k; placements covering none are ignored while hits are open.
  double target_base = 20.0;
};

// Placement-count heat map. Fires the highest-scoring unfired cell, lowest
// index on ties. Deterministic.
class ProbMapPolicy : public AttackerPolicy {
 public:
  ProbMapPolicy(const BoardConfig& config, ProbMapOptions options = {});

  void Reset(std::uint64_t seed) override;
  int Act(const PublicState& state) override;
  bool deterministic() const override { return true; }
  std::unique_ptr<AttackerPolicy> Clone() const override {
    return std::make_unique<ProbMapPolicy>(*this);
  }
  std::string id() const override;

  // Scores of the last Act() call, one per cell (0 for fired cells).
  const std::vector<double>& last_scores() const { return scores_; }
  bool exact_mode() const { return universe_ != nullptr; }

 private:
  void Sync(const PublicState& state);
  void ScoreExact(const PublicState& state);
  void ScoreIndependent(const PublicState& state);
  void ResolveSunk(const PublicState& state, int ship, int cell);

  BoardConfig config_;
  ProbMapOptions options_;
  std::shared_ptr<const LayoutSet> universe_;
  std::map<int, std::vector<std::vector<int>>> placements_by_length_;
  // Exact mode: indices of layouts consistent with the log.
  std::vector<int> consistent_;
  // Independent mode: cells attributed to sunk ships.
  std::vector<bool> resolved_;
  std::size_t processed_ = 0;
  std::optional<PublicState> seen_;
  std::vector<double> scores_;
};

struct ParticleOptions {
  int n_particles = 1000;
  // Total construction attempts allowed when every particle has died.
  int attempt_budget = 10'000;
  // Metropolis moves per particle after resampling.
  int rejuvenation_moves = 10;
  // Resample when fewer than this fraction of particles survive a shot.
  double resample_fraction = 0.5;
};

// Particle-filter belief search. Particles are full layouts consistent with
// the shot log; the policy fires the unfired cell with the most particle
// occupancy, lowest index on ties.
class ParticlePolicy : public AttackerPolicy {
 public:
  ParticlePolicy(const BoardConfig& config, ParticleOptions options = {});

  void Reset(std::uint64_t seed) override;
  int Act(const PublicState& state) override;
  bool deterministic() const override { return false; }
  std::unique_ptr<AttackerPolicy> Clone() const override {
    return std::make_unique<ParticlePolicy>(*this);
  }
  std::string id() const override;

  const std::vector<Layout>& particles() const { return particles_; }
  // Particle occupancy frequencies per cell after syncing to `state`.
  std::vector<double> Marginals(const PublicState& state);

 private:
  void Sync(const PublicState& state);
  void Replenish(const PublicState& state, std::vector<Layout> survivors);
  bool Construct(const PublicState& state, Layout& out);
  void Rejuvenate(const PublicState& state, Layout& particle);

  BoardConfig config_;
  ParticleOptions options_;
  std::map<int, std::vector<ShipPlacement>> placements_by_length_;
  Rng rng_;
  std::vector<Layout> particles_;
  std::size_t processed_ = 0;
  std::optional<PublicState> seen_;
};

// Canonical text of an ordered shot log, e.g. "4h,3m,5s0".
std::string HistoryKey(std::span<const Shot> log);
std::uint64_t HistoryHash(std::string_view key);

// Deterministic history-dependent policy as an explicit lookup table.
class DeterministicPolicyTable {
 public:
  DeterministicPolicyTable() = default;

  // Throws kInvalidArgument when the key is already mapped to another cell.
  void Set(const std::string& history_key, int cell);
  // -1 when unmapped.
  int Lookup(const std::string& history_key) const;
  std::size_t size() const { return table_.size(); }
  const std::map<std::string, int>& entries() const { return table_; }

  // Flat text: one "hash<TAB>history<TAB>cell" line per entry. The history
  // for the empty log is "-".
  void Write(std::ostream& out) const;
  static DeterministicPolicyTable Read(std::istream& in);

  friend bool operator==(const DeterministicPolicyTable&,
                         const DeterministicPolicyTable&) = default;

 private:
  std::map<std::string, int> table_;
};

class TablePolicy : public AttackerPolicy {
 public:
  TablePolicy(std::shared_ptr<const DeterministicPolicyTable> table, std::string id)
      : table_(std::move(table)), id_(std::move(id)) {}

  void Reset(std::uint64_t) override {}
  // Throws kPolicyViolation for a history outside the table.
  int Act(const PublicState& state) override;
  bool deterministic() const override { return true; }
  std::unique_ptr<AttackerPolicy> Clone() const override {
    return std::make_unique<TablePolicy>(*this);
  }
  std::string id() const override { return id_; }
  const DeterministicPolicyTable& table() const { return *table_; }

 private:
  std::shared_ptr<const DeterministicPolicyTable> table_;
  std::string id_;
};

// Plays a deterministic policy on every layout of `universe` and records each
// visited history. Throws kInvalidArgument for a stochastic policy or one
// that acts differently on the same history.
DeterministicPolicyTable RecordPolicyTable(AttackerPolicy& policy,
                                           const LayoutSet& universe);

// Posterior over an enumerated universe.
struct BeliefState {
  std::shared_ptr<const LayoutSet> universe;
  std::vector<double> weights;

  std::vector<int> Support() const;
  std::vector<double> Marginals() const;
};

// Bayes restriction of an explicit prior to the layouts consistent with the
// log. Throws kZeroPosterior when nothing is consistent.
BeliefState ExactPosterior(std::span<const Shot> shot_log,
                           const LatentDistribution& prior, const BoardConfig& config);

}  // namespace hiddenfleet

#endif  // HIDDENFLEET_ATTACKERS_H_
