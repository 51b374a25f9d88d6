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

// Deterministic Battleship environment. The hidden layout is drawn once and
// then fixed; everything afterwards is a deterministic function of the layout
// and the attacker's shots.

#ifndef HIDDENFLEET_BOARD_H_
#define HIDDENFLEET_BOARD_H_

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace hiddenfleet {

inline constexpr std::int64_t kDefaultEnumerationGuard = 1'000'000;

struct BoardConfig {
  int height = 10;
  int width = 10;
  std::vector<int> ship_lengths = {5, 4, 3, 3, 2};
  std::optional<int> truncation_cap;
  // Off by default: ships may share edges.
  bool no_touch = false;

  int num_cells() const { return height * width; }
  int num_ships() const { return static_cast<int>(ship_lengths.size()); }
  int total_ship_cells() const;
  // T_max = min(H*W, T_cap).
  int horizon() const;
  int row(int cell) const { return cell / width; }
  int col(int cell) const { return cell % width; }

  // Throws kInvalidArgument on a malformed board.
  void Validate() const;
  // Stable text key, used for caches and manifests.
  std::string Key() const;

  friend bool operator==(const BoardConfig&, const BoardConfig&) = default;
};

enum class Orientation : std::uint8_t { kHorizontal = 0, kVertical = 1 };

struct ShipPlacement {
  int anchor = 0;
  Orientation orientation = Orientation::kHorizontal;

  friend auto operator<=>(const ShipPlacement&, const ShipPlacement&) = default;
};

// Cells covered by a ship of `length` at `placement`, or nullopt when the ship
// would leave the board.
std::optional<std::vector<int>> PlacementCells(const BoardConfig& config,
                                               int length,
                                               ShipPlacement placement);

// Every in-bounds placement of a ship of `length`, ordered by (anchor,
// orientation). Length-1 ships only get the horizontal orientation.
std::vector<ShipPlacement> AllPlacements(const BoardConfig& config, int length);

// One legal hidden fleet placement (the latent variable).
class Layout {
 public:
  Layout() = default;
  // Throws kInvalidArgument unless the placements are in bounds, pairwise
  // disjoint and (with no_touch) non-adjacent.
  Layout(const BoardConfig& config, std::vector<ShipPlacement> placements);

  int num_ships() const { return static_cast<int>(placements_.size()); }
  const std::vector<ShipPlacement>& placements() const { return placements_; }
  const std::vector<int>& ship_cells(int ship) const { return ship_cells_[ship]; }
  // Owning ship index, or -1 for water.
  int owner(int cell) const { return owner_[cell]; }
  bool occupied(int cell) const { return owner_[cell] >= 0; }
  std::vector<bool> OccupancyMask() const;

  friend bool operator==(const Layout& a, const Layout& b) {
    return a.placements_ == b.placements_;
  }
  friend auto operator<=>(const Layout& a, const Layout& b) {
    return a.placements_ <=> b.placements_;
  }

 private:
  std::vector<ShipPlacement> placements_;
  std::vector<std::vector<int>> ship_cells_;
  std::vector<std::int8_t> owner_;
};

// True when the placements form a legal layout for `config`.
bool IsLegalPlacementSet(const BoardConfig& config,
                         std::span<const ShipPlacement> placements);

// Upper bound on the number of legal layouts: the product of per-ship
// placement counts (saturating).
std::int64_t EstimatedLayoutCount(const BoardConfig& config);

// All legal layouts in canonical order. Throws kGuardExceeded when the
// estimate exceeds `guard`.
std::vector<Layout> EnumerateLayouts(const BoardConfig& config,
                                     std::int64_t guard = kDefaultEnumerationGuard);

// Enumerated universe shared by explicit distributions and exact solvers.
class LayoutSet {
 public:
  LayoutSet(BoardConfig config, std::vector<Layout> layouts);

  const BoardConfig& config() const { return config_; }
  const std::vector<Layout>& layouts() const { return layouts_; }
  const Layout& operator[](std::size_t i) const { return layouts_[i]; }
  std::size_t size() const { return layouts_.size(); }
  // Index of `layout` in canonical order, or -1.
  int IndexOf(const Layout& layout) const;

 private:
  BoardConfig config_;
  std::vector<Layout> layouts_;
};

// Process-wide cache of enumerations. Returns nullptr when the board is over
// `guard`.
std::shared_ptr<const LayoutSet> CachedLayoutSet(
    const BoardConfig& config, std::int64_t guard = kDefaultEnumerationGuard);

struct Observation {
  enum class Kind : std::uint8_t { kMiss, kHit, kSunk };
  Kind kind = Kind::kMiss;
  // Index of the sunk ship for kSunk, -1 otherwise.
  int ship = -1;

  static Observation Miss() { return {Kind::kMiss, -1}; }
  static Observation Hit() { return {Kind::kHit, -1}; }
  static Observation Sunk(int ship) { return {Kind::kSunk, ship}; }
  bool is_hit() const { return kind != Kind::kMiss; }

  friend bool operator==(const Observation&, const Observation&) = default;
};

std::string ToString(Observation obs);
// Inverse of ToString: "miss", "hit", "sunk:<i>".
Observation ParseObservation(const std::string& text);

struct Shot {
  int cell = 0;
  Observation outcome;

  friend bool operator==(const Shot&, const Shot&) = default;
};

enum class CellMark : std::uint8_t { kUnknown, kMiss, kHit };

// Everything the attacker can see: miss/hit masks, which ships are sunk and
// the ordered shot log. Per-ship remaining cell counts depend on the hidden
// layout; see UnsunkStructure().
class PublicState {
 public:
  explicit PublicState(const BoardConfig& config);

  // Rebuilds a state from a shot log. Throws kInconsistentState on repeated
  // cells or sunk events that contradict the log.
  static PublicState FromLog(const BoardConfig& config, std::span<const Shot> log);

  const BoardConfig& config() const { return *config_; }
  int t() const { return static_cast<int>(log_.size()); }
  CellMark mark(int cell) const { return marks_[cell]; }
  bool is_miss(int cell) const { return marks_[cell] == CellMark::kMiss; }
  bool is_hit(int cell) const { return marks_[cell] == CellMark::kHit; }
  bool is_fired(int cell) const { return marks_[cell] != CellMark::kUnknown; }
  bool sunk(int ship) const { return sunk_[ship]; }
  int num_sunk() const { return num_sunk_; }
  bool all_sunk() const { return num_sunk_ == config_->num_ships(); }
  // Cell on which ship `ship` was reported sunk, or -1.
  int sinking_cell(int ship) const { return sinking_cell_[ship]; }
  const std::vector<Shot>& log() const { return log_; }

  // Cells with no miss and no hit, ascending.
  std::vector<int> LegalActions() const;
  bool IsLegal(int cell) const;

  // Records a shot without consulting any layout. Throws kIllegalAction.
  void Apply(int cell, Observation outcome);

 private:
  std::shared_ptr<const BoardConfig> config_;
  std::vector<CellMark> marks_;
  std::vector<bool> sunk_;
  std::vector<int> sinking_cell_;
  int num_sunk_ = 0;
  std::vector<Shot> log_;
};

std::vector<int> LegalActions(const PublicState& state);

// Outcome of firing `cell` when the hidden layout is `layout`. Assumes the
// state is consistent with the layout and `cell` is unfired.
Observation OutcomeOf(const Layout& layout, const PublicState& state, int cell);

// True when replaying the state's log on `layout` reproduces every outcome.
bool IsConsistent(const Layout& layout, const PublicState& state);

// Per-ship remaining (unfired) cell count; zero exactly for sunk ships.
std::vector<int> UnsunkStructure(const Layout& layout, const PublicState& state);

struct StepResult {
  PublicState state;
  Observation observation;
};

// Checked transition. Throws kIllegalAction for a fired or out-of-range cell
// and kInconsistentState when `layout` contradicts the recorded outcomes.
StepResult Step(const PublicState& state, const Layout& layout, int action);

// Hit / Miss / Unknown channels, each H*W, row-major, {0,1}-valued.
struct ObservationTensor {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> hit;
  std::vector<std::uint8_t> miss;
  std::vector<std::uint8_t> unknown;
};

ObservationTensor MakeObservationTensor(const PublicState& state);

struct EpisodeResult {
  int tau = 0;
  bool truncated = false;
  std::vector<Shot> shot_log;
};

class AttackerPolicy;

// Runs `policy` against `layout` until every ship is sunk or t = T_max.
// Throws kPolicyViolation when the policy emits an illegal action.
EpisodeResult Rollout(AttackerPolicy& policy, const Layout& layout,
                      const BoardConfig& config, std::uint64_t seed);

// Per-step rewards r_0..r_tau: -1 before tau, 0 at tau.
std::vector<int> StepRewards(const EpisodeResult& episode);

// CSV with header "episode,step,cell,outcome".
void WriteShotLogCsv(std::ostream& out, std::span<const EpisodeResult> episodes);

}  // namespace hiddenfleet

#endif  // HIDDENFLEET_BOARD_H_
