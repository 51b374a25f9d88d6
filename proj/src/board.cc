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

#include "hiddenfleet/board.h"

#include <algorithm>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include "hiddenfleet/error.h"
#include "hiddenfleet/policy.h"

namespace hiddenfleet {

int BoardConfig::total_ship_cells() const {
  return std::accumulate(ship_lengths.begin(), ship_lengths.end(), 0);
}

int BoardConfig::horizon() const {
  const int cells = num_cells();
  return truncation_cap ? std::min(cells, *truncation_cap) : cells;
}

void BoardConfig::Validate() const {
  Require(height > 0 && width > 0, ErrorKind::kInvalidArgument,
          "board height and width must be positive");
  Require(!ship_lengths.empty(), ErrorKind::kInvalidArgument,
          "at least one ship is required");
  Require(ship_lengths.size() < 120, ErrorKind::kInvalidArgument,
          "too many ships");
  for (int len : ship_lengths) {
    Require(len > 0, ErrorKind::kInvalidArgument, "ship lengths must be positive");
    Require(len <= std::max(height, width), ErrorKind::kInvalidArgument,
            "ship of length " + std::to_string(len) + " does not fit the board");
  }
  Require(total_ship_cells() <= num_cells(), ErrorKind::kInvalidArgument,
          "ships cover more cells than the board has");
  if (truncation_cap) {
    Require(*truncation_cap > 0, ErrorKind::kInvalidArgument,
            "truncation_cap must be positive");
  }
}

std::string BoardConfig::Key() const {
  std::ostringstream os;
  os << height << "x" << width << ":";
  for (std::size_t i = 0; i < ship_lengths.size(); ++i) {
    os << (i ? "," : "") << ship_lengths[i];
  }
  os << ":cap=" << (truncation_cap ? std::to_string(*truncation_cap) : "none")
     << ":touch=" << (no_touch ? "no" : "yes");
  return os.str();
}

std::optional<std::vector<int>> PlacementCells(const BoardConfig& config,
                                               int length,
                                               ShipPlacement placement) {
  if (placement.anchor < 0 || placement.anchor >= config.num_cells()) {
    return std::nullopt;
  }
  const int r = config.row(placement.anchor);
  const int c = config.col(placement.anchor);
  std::vector<int> cells;
  cells.reserve(length);
  if (placement.orientation == Orientation::kHorizontal) {
    if (c + length > config.width) return std::nullopt;
    for (int k = 0; k < length; ++k) cells.push_back(placement.anchor + k);
  } else {
    if (r + length > config.height) return std::nullopt;
    for (int k = 0; k < length; ++k) {
      cells.push_back(placement.anchor + k * config.width);
    }
  }
  return cells;
}

std::vector<ShipPlacement> AllPlacements(const BoardConfig& config, int length) {
  std::vector<ShipPlacement> out;
  for (int cell = 0; cell < config.num_cells(); ++cell) {
    for (Orientation o : {Orientation::kHorizontal, Orientation::kVertical}) {
      if (length == 1 && o == Orientation::kVertical) continue;
      if (PlacementCells(config, length, {cell, o})) out.push_back({cell, o});
    }
  }
  return out;
}

namespace {

bool Touches(const BoardConfig& config, const std::vector<std::int8_t>& owner,
             int cell, int ship) {
  const int r = config.row(cell);
  const int c = config.col(cell);
  const int dr[] = {-1, 1, 0, 0};
  const int dc[] = {0, 0, -1, 1};
  for (int k = 0; k < 4; ++k) {
    const int rr = r + dr[k];
    const int cc = c + dc[k];
    if (rr < 0 || cc < 0 || rr >= config.height || cc >= config.width) continue;
    const int o = owner[rr * config.width + cc];
    if (o >= 0 && o != ship) return true;
  }
  return false;
}

}  // namespace

bool IsLegalPlacementSet(const BoardConfig& config,
                         std::span<const ShipPlacement> placements) {
  if (static_cast<int>(placements.size()) != config.num_ships()) return false;
  std::vector<std::int8_t> owner(config.num_cells(), -1);
  for (int i = 0; i < config.num_ships(); ++i) {
    auto cells = PlacementCells(config, config.ship_lengths[i], placements[i]);
    if (!cells) return false;
    if (config.ship_lengths[i] == 1 &&
        placements[i].orientation == Orientation::kVertical) {
      return false;
    }
    for (int cell : *cells) {
      if (owner[cell] >= 0) return false;
      owner[cell] = static_cast<std::int8_t>(i);
    }
  }
  if (config.no_touch) {
    for (int cell = 0; cell < config.num_cells(); ++cell) {
      if (owner[cell] >= 0 && Touches(config, owner, cell, owner[cell])) return false;
    }
  }
  return true;
}

Layout::Layout(const BoardConfig& config, std::vector<ShipPlacement> placements)
    : placements_(std::move(placements)) {
  Require(IsLegalPlacementSet(config, placements_), ErrorKind::kInvalidArgument,
          "illegal layout for board " + config.Key());
  owner_.assign(config.num_cells(), -1);
  ship_cells_.reserve(placements_.size());
  for (int i = 0; i < num_ships(); ++i) {
    auto cells = *PlacementCells(config, config.ship_lengths[i], placements_[i]);
    for (int cell : cells) owner_[cell] = static_cast<std::int8_t>(i);
    ship_cells_.push_back(std::move(cells));
  }
}

std::vector<bool> Layout::OccupancyMask() const {
  std::vector<bool> mask(owner_.size());
  for (std::size_t i = 0; i < owner_.size(); ++i) mask[i] = owner_[i] >= 0;
  return mask;
}

std::int64_t EstimatedLayoutCount(const BoardConfig& config) {
  constexpr std::int64_t kCap = std::numeric_limits<std::int64_t>::max() / 4096;
  std::int64_t estimate = 1;
  for (int len : config.ship_lengths) {
    const auto n = static_cast<std::int64_t>(AllPlacements(config, len).size());
    if (n == 0) return 0;
    estimate = estimate > kCap / n ? kCap : estimate * n;
  }
  return estimate;
}

namespace {

void EnumerateRec(const BoardConfig& config,
                  const std::vector<std::vector<ShipPlacement>>& per_ship,
                  std::vector<ShipPlacement>& current,
                  std::vector<std::int8_t>& owner, std::vector<Layout>& out) {
  const int i = static_cast<int>(current.size());
  if (i == config.num_ships()) {
    if (!config.no_touch || IsLegalPlacementSet(config, current)) {
      out.emplace_back(config, current);
    }
    return;
  }
  for (const ShipPlacement& p : per_ship[i]) {
    auto cells = *PlacementCells(config, config.ship_lengths[i], p);
    bool free = std::all_of(cells.begin(), cells.end(),
                            [&](int cell) { return owner[cell] < 0; });
    if (!free) continue;
    for (int cell : cells) owner[cell] = static_cast<std::int8_t>(i);
    current.push_back(p);
    EnumerateRec(config, per_ship, current, owner, out);
    current.pop_back();
    for (int cell : cells) owner[cell] = -1;
  }
}

}  // namespace

std::vector<Layout> EnumerateLayouts(const BoardConfig& config, std::int64_t guard) {
  config.Validate();
  const std::int64_t estimate = EstimatedLayoutCount(config);
  Require(estimate <= guard, ErrorKind::kGuardExceeded,
          "board " + config.Key() + " has an estimated " + std::to_string(estimate) +
              " layouts, above the enumeration guard " + std::to_string(guard) +
              "; use a sampler-based distribution");
  std::vector<std::vector<ShipPlacement>> per_ship;
  for (int len : config.ship_lengths) per_ship.push_back(AllPlacements(config, len));
  std::vector<Layout> out;
  std::vector<ShipPlacement> current;
  std::vector<std::int8_t> owner(config.num_cells(), -1);
  EnumerateRec(config, per_ship, current, owner, out);
  return out;
}

LayoutSet::LayoutSet(BoardConfig config, std::vector<Layout> layouts)
    : config_(std::move(config)), layouts_(std::move(layouts)) {
  Require(std::is_sorted(layouts_.begin(), layouts_.end()),
          ErrorKind::kInvalidArgument, "layout set must be in canonical order");
}

int LayoutSet::IndexOf(const Layout& layout) const {
  auto it = std::lower_bound(layouts_.begin(), layouts_.end(), layout);
  if (it == layouts_.end() || !(*it == layout)) return -1;
  return static_cast<int>(it - layouts_.begin());
}

std::shared_ptr<const LayoutSet> CachedLayoutSet(const BoardConfig& config,
                                                 std::int64_t guard) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const LayoutSet>> cache;
  config.Validate();
  if (EstimatedLayoutCount(config) > guard) return nullptr;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[config.Key()];
  if (!slot) {
    slot = std::make_shared<const LayoutSet>(config, EnumerateLayouts(config, guard));
  }
  return slot;
}

std::string ToString(Observation obs) {
  switch (obs.kind) {
    case Observation::Kind::kMiss:
      return "miss";
    case Observation::Kind::kHit:
      return "hit";
    case Observation::Kind::kSunk:
      return "sunk:" + std::to_string(obs.ship);
  }
  return "?";
}

Observation ParseObservation(const std::string& text) {
  if (text == "miss") return Observation::Miss();
  if (text == "hit") return Observation::Hit();
  if (text.rfind("sunk:", 0) == 0) {
    try {
      return Observation::Sunk(std::stoi(text.substr(5)));
    } catch (const std::exception&) {
    }
  }
  Fail(ErrorKind::kInvalidArgument, "bad observation '" + text + "'");
}

PublicState::PublicState(const BoardConfig& config)
    : config_(std::make_shared<const BoardConfig>(config)),
      marks_(config.num_cells(), CellMark::kUnknown),
      sunk_(config.num_ships(), false),
      sinking_cell_(config.num_ships(), -1) {}

PublicState PublicState::FromLog(const BoardConfig& config,
                                 std::span<const Shot> log) {
  PublicState state(config);
  for (const Shot& shot : log) {
    if (!state.IsLegal(shot.cell)) {
      Fail(ErrorKind::kInconsistentState,
           "shot log fires cell " + std::to_string(shot.cell) + " twice or out of range");
    }
    if (shot.outcome.kind == Observation::Kind::kSunk) {
      const int s = shot.outcome.ship;
      if (s < 0 || s >= config.num_ships() || state.sunk(s)) {
        Fail(ErrorKind::kInconsistentState, "shot log has an invalid sunk event");
      }
    }
    state.Apply(shot.cell, shot.outcome);
  }
  return state;
}

bool PublicState::IsLegal(int cell) const {
  return cell >= 0 && cell < config_->num_cells() && marks_[cell] == CellMark::kUnknown;
}

std::vector<int> PublicState::LegalActions() const {
  std::vector<int> out;
  out.reserve(marks_.size() - log_.size());
  for (int c = 0; c < static_cast<int>(marks_.size()); ++c) {
    if (marks_[c] == CellMark::kUnknown) out.push_back(c);
  }
  return out;
}

void PublicState::Apply(int cell, Observation outcome) {
  Require(IsLegal(cell), ErrorKind::kIllegalAction,
          "cell " + std::to_string(cell) + " is already fired or out of range");
  marks_[cell] = outcome.is_hit() ? CellMark::kHit : CellMark::kMiss;
  if (outcome.kind == Observation::Kind::kSunk) {
    Require(outcome.ship >= 0 && outcome.ship < config_->num_ships() &&
                !sunk_[outcome.ship],
            ErrorKind::kInconsistentState, "invalid sunk event");
    sunk_[outcome.ship] = true;
    sinking_cell_[outcome.ship] = cell;
    ++num_sunk_;
  }
  log_.push_back({cell, outcome});
}

std::vector<int> LegalActions(const PublicState& state) { return state.LegalActions(); }

Observation OutcomeOf(const Layout& layout, const PublicState& state, int cell) {
  const int ship = layout.owner(cell);
  if (ship < 0) return Observation::Miss();
  for (int other : layout.ship_cells(ship)) {
    if (other != cell && !state.is_hit(other)) return Observation::Hit();
  }
  return Observation::Sunk(ship);
}

bool IsConsistent(const Layout& layout, const PublicState& state) {
  const BoardConfig& config = state.config();
  if (layout.num_ships() != config.num_ships()) return false;
  std::vector<int> fire_time(config.num_cells(), -1);
  int hits = 0;
  for (int t = 0; t < state.t(); ++t) {
    fire_time[state.log()[t].cell] = t;
    if (state.log()[t].outcome.is_hit()) ++hits;
  }
  int fired_ship_cells = 0;
  for (int i = 0; i < layout.num_ships(); ++i) {
    int fired = 0;
    int last_cell = -1;
    int last_time = -1;
    for (int cell : layout.ship_cells(i)) {
      if (state.is_miss(cell)) return false;
      if (fire_time[cell] >= 0) {
        ++fired;
        if (fire_time[cell] > last_time) {
          last_time = fire_time[cell];
          last_cell = cell;
        }
      }
    }
    const bool complete = fired == static_cast<int>(layout.ship_cells(i).size());
    if (state.sunk(i) != complete) return false;
    if (complete && state.sinking_cell(i) != last_cell) return false;
    fired_ship_cells += fired;
  }
  return fired_ship_cells == hits;
}

std::vector<int> UnsunkStructure(const Layout& layout, const PublicState& state) {
  std::vector<int> remaining(layout.num_ships(), 0);
  for (int i = 0; i < layout.num_ships(); ++i) {
    for (int cell : layout.ship_cells(i)) {
      if (!state.is_fired(cell)) ++remaining[i];
    }
  }
  return remaining;
}

StepResult Step(const PublicState& state, const Layout& layout, int action) {
  Require(state.IsLegal(action), ErrorKind::kIllegalAction,
          "cell " + std::to_string(action) + " is already fired or out of range");
  Require(IsConsistent(layout, state), ErrorKind::kInconsistentState,
          "layout contradicts the recorded outcomes");
  const Observation obs = OutcomeOf(layout, state, action);
  StepResult result{state, obs};
  result.state.Apply(action, obs);
  return result;
}

ObservationTensor MakeObservationTensor(const PublicState& state) {
  const BoardConfig& config = state.config();
  ObservationTensor tensor;
  tensor.height = config.height;
  tensor.width = config.width;
  const int n = config.num_cells();
  tensor.hit.resize(n);
  tensor.miss.resize(n);
  tensor.unknown.resize(n);
  for (int c = 0; c < n; ++c) {
    tensor.hit[c] = state.is_hit(c) ? 1 : 0;
    tensor.miss[c] = state.is_miss(c) ? 1 : 0;
    tensor.unknown[c] = static_cast<std::uint8_t>(1 - (tensor.hit[c] + tensor.miss[c]));
  }
  return tensor;
}

EpisodeResult Rollout(AttackerPolicy& policy, const Layout& layout,
                      const BoardConfig& config, std::uint64_t seed) {
  Require(layout.num_ships() == config.num_ships(), ErrorKind::kInvalidArgument,
          "layout does not match the board config");
  policy.Reset(seed);
  PublicState state(config);
  const int horizon = config.horizon();
  while (!state.all_sunk() && state.t() < horizon) {
    const int action = policy.Act(state);
    if (!state.IsLegal(action)) {
      Fail(ErrorKind::kPolicyViolation,
           "policy " + policy.id() + " fired illegal cell " + std::to_string(action) +
               " at t=" + std::to_string(state.t()));
    }
    state.Apply(action, OutcomeOf(layout, state, action));
  }
  EpisodeResult result;
  result.tau = state.t();
  result.truncated = !state.all_sunk();
  result.shot_log = state.log();
  return result;
}

std::vector<int> StepRewards(const EpisodeResult& episode) {
  std::vector<int> rewards(episode.tau + 1, -1);
  rewards[episode.tau] = 0;
  return rewards;
}

void WriteShotLogCsv(std::ostream& out, std::span<const EpisodeResult> episodes) {
  out << "episode,step,cell,outcome\n";
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const auto& log = episodes[e].shot_log;
    for (std::size_t t = 0; t < log.size(); ++t) {
      out << e << ',' << t << ',' << log[t].cell << ',' << ToString(log[t].outcome)
          << '\n';
    }
  }
}

}  // namespace hiddenfleet
