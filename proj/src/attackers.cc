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

#include "hiddenfleet/attackers.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hiddenfleet/error.h"

namespace hiddenfleet {

namespace {

int ArgmaxCell(const std::vector<double>& scores, const PublicState& state,
               const std::vector<bool>* allowed = nullptr) {
  int best = -1;
  double best_score = 0.0;
  for (int c = 0; c < static_cast<int>(scores.size()); ++c) {
    if (state.is_fired(c)) continue;
    if (allowed && !(*allowed)[c]) continue;
    if (scores[c] > best_score) {
      best_score = scores[c];
      best = c;
    }
  }
  return best;
}

int FirstLegal(const PublicState& state) {
  for (int c = 0; c < state.config().num_cells(); ++c) {
    if (!state.is_fired(c)) return c;
  }
  return -1;
}

}  // namespace

int RandomPolicy::Act(const PublicState& state) {
  const int n_legal = state.config().num_cells() - state.t();
  Require(n_legal > 0, ErrorKind::kPolicyViolation, "no legal actions left");
  int k = UniformInt(rng_, 0, n_legal - 1);
  for (int c = 0; c < state.config().num_cells(); ++c) {
    if (state.is_fired(c)) continue;
    if (k-- == 0) return c;
  }
  return -1;
}

// ---------------------------------------------------------------------------
// ProbMap

ProbMapPolicy::ProbMapPolicy(const BoardConfig& config, ProbMapOptions options)
    : config_(config), options_(options) {
  config_.Validate();
  if (EstimatedLayoutCount(config_) <= options_.placement_budget) {
    universe_ = CachedLayoutSet(config_, options_.placement_budget);
  }
  for (int len : config_.ship_lengths) {
    auto& cells = placements_by_length_[len];
    if (!cells.empty()) continue;
    for (const auto& p : AllPlacements(config_, len)) {
      cells.push_back(*PlacementCells(config_, len, p));
    }
  }
  Reset(0);
}

std::string ProbMapPolicy::id() const {
  return std::string("probmap") + (exact_mode() ? "-exact" : "") +
         (options_.parity && !exact_mode() ? "-parity" : "");
}

void ProbMapPolicy::Reset(std::uint64_t) {
  processed_ = 0;
  seen_.emplace(config_);
  consistent_.clear();
  if (universe_) {
    consistent_.resize(universe_->size());
    for (std::size_t z = 0; z < universe_->size(); ++z) consistent_[z] = static_cast<int>(z);
  }
  resolved_.assign(config_.num_cells(), false);
  scores_.assign(config_.num_cells(), 0.0);
}

void ProbMapPolicy::Sync(const PublicState& state) {
  if (state.t() < static_cast<int>(processed_)) Reset(0);
  const auto& log = state.log();
  for (; processed_ < log.size(); ++processed_) {
    const Shot& shot = log[processed_];
    if (universe_) {
      std::vector<int> kept;
      kept.reserve(consistent_.size());
      for (int z : consistent_) {
        if (OutcomeOf((*universe_)[z], *seen_, shot.cell) == shot.outcome) kept.push_back(z);
      }
      consistent_ = std::move(kept);
    }
    seen_->Apply(shot.cell, shot.outcome);
    if (!universe_ && shot.outcome.kind == Observation::Kind::kSunk) {
      ResolveSunk(*seen_, shot.outcome.ship, shot.cell);
    }
  }
}

void ProbMapPolicy::ResolveSunk(const PublicState& state, int ship, int cell) {
  const int len = config_.ship_lengths[ship];
  auto open_hit = [&](int c) { return state.is_hit(c) && !resolved_[c]; };
  std::vector<const std::vector<int>*> candidates;
  for (const auto& cells : placements_by_length_.at(len)) {
    if (std::find(cells.begin(), cells.end(), cell) == cells.end()) continue;
    if (std::all_of(cells.begin(), cells.end(), open_hit)) candidates.push_back(&cells);
  }
  if (candidates.empty()) {
    resolved_[cell] = true;
    return;
  }
  // Among ambiguous attributions prefer one that leaves every other open hit
  // coverable by a remaining unsunk ship.
  auto leaves_coverable = [&](const std::vector<int>& chosen) {
    std::vector<bool> resolved = resolved_;
    for (int c : chosen) resolved[c] = true;
    for (int h = 0; h < config_.num_cells(); ++h) {
      if (!state.is_hit(h) || resolved[h]) continue;
      bool covered = false;
      for (int s = 0; s < config_.num_ships() && !covered; ++s) {
        if (state.sunk(s)) continue;
        for (const auto& cells : placements_by_length_.at(config_.ship_lengths[s])) {
          if (std::find(cells.begin(), cells.end(), h) == cells.end()) continue;
          if (std::none_of(cells.begin(), cells.end(), [&](int c) {
                return state.is_miss(c) || resolved[c];
              })) {
            covered = true;
            break;
          }
        }
      }
      if (!covered) return false;
    }
    return true;
  };
  const std::vector<int>* pick = candidates.front();
  if (candidates.size() > 1) {
    for (const auto* cand : candidates) {
      if (leaves_coverable(*cand)) {
        pick = cand;
        break;
      }
    }
  }
  for (int c : *pick) resolved_[c] = true;
}

void ProbMapPolicy::ScoreExact(const PublicState& state) {
  std::fill(scores_.begin(), scores_.end(), 0.0);
  for (int z : consistent_) {
    const Layout& layout = (*universe_)[z];
    for (int i = 0; i < layout.num_ships(); ++i) {
      for (int cell : layout.ship_cells(i)) {
        if (!state.is_fired(cell)) scores_[cell] += 1.0;
      }
    }
  }
}

void ProbMapPolicy::ScoreIndependent(const PublicState& state) {
  std::fill(scores_.begin(), scores_.end(), 0.0);
  bool target = false;
  for (int c = 0; c < config_.num_cells(); ++c) {
    if (state.is_hit(c) && !resolved_[c]) target = true;
  }
  for (int s = 0; s < config_.num_ships(); ++s) {
    if (state.sunk(s)) continue;
    const int len = config_.ship_lengths[s];
    for (const auto& cells : placements_by_length_.at(len)) {
      int open_hits = 0;
      bool blocked = false;
      for (int c : cells) {
        if (state.is_miss(c) || resolved_[c]) {
          blocked = true;
          break;
        }
        if (state.is_hit(c)) ++open_hits;
      }
      if (blocked || open_hits == len) continue;
      if (target && open_hits == 0) continue;
      const double w = target ? std::pow(options_.target_base, open_hits) : 1.0;
      for (int c : cells) {
        if (!state.is_fired(c)) scores_[c] += w;
      }
    }
  }
}

int ProbMapPolicy::Act(const PublicState& state) {
  Sync(state);
  if (universe_) {
    ScoreExact(state);
    const int best = ArgmaxCell(scores_, state);
    return best >= 0 ? best : FirstLegal(state);
  }
  ScoreIndependent(state);
  bool hunting = true;
  for (int c = 0; c < config_.num_cells(); ++c) {
    if (state.is_hit(c) && !resolved_[c]) hunting = false;
  }
  if (hunting && options_.parity) {
    int spacing = config_.num_cells();
    for (int s = 0; s < config_.num_ships(); ++s) {
      if (!state.sunk(s)) spacing = std::min(spacing, config_.ship_lengths[s]);
    }
    std::vector<bool> allowed(config_.num_cells());
    for (int c = 0; c < config_.num_cells(); ++c) {
      allowed[c] = (config_.row(c) + config_.col(c)) % spacing == 0;
    }
    const int best = ArgmaxCell(scores_, state, &allowed);
    if (best >= 0) return best;
  }
  const int best = ArgmaxCell(scores_, state);
  return best >= 0 ? best : FirstLegal(state);
}

// ---------------------------------------------------------------------------
// Particle belief

namespace {

// Fired-cell count of a candidate ship placement if it agrees with the
// public record, -1 otherwise.
int ShipAgreement(const PublicState& state, const std::vector<int>& fire_time,
                  const std::vector<int>& cells, int ship) {
  int fired = 0;
  int last_cell = -1;
  int last_time = -1;
  for (int c : cells) {
    if (state.is_miss(c)) return -1;
    if (fire_time[c] >= 0) {
      ++fired;
      if (fire_time[c] > last_time) {
        last_time = fire_time[c];
        last_cell = c;
      }
    }
  }
  const bool complete = fired == static_cast<int>(cells.size());
  if (complete != state.sunk(ship)) return -1;
  if (complete && state.sinking_cell(ship) != last_cell) return -1;
  return fired;
}

std::vector<int> FireTimes(const PublicState& state) {
  std::vector<int> fire_time(state.config().num_cells(), -1);
  for (int t = 0; t < state.t(); ++t) fire_time[state.log()[t].cell] = t;
  return fire_time;
}

}  // namespace

ParticlePolicy::ParticlePolicy(const BoardConfig& config, ParticleOptions options)
    : config_(config), options_(options) {
  config_.Validate();
  Require(options_.n_particles >= 1, ErrorKind::kInvalidArgument,
          "particle policy needs n_particles >= 1");
  for (int len : config_.ship_lengths) {
    if (!placements_by_length_.count(len)) {
      placements_by_length_[len] = AllPlacements(config_, len);
    }
  }
}

std::string ParticlePolicy::id() const {
  return "particle-" + std::to_string(options_.n_particles);
}

void ParticlePolicy::Reset(std::uint64_t seed) {
  rng_.seed(seed);
  processed_ = 0;
  seen_.emplace(config_);
  particles_.clear();
  particles_.reserve(options_.n_particles);
  std::shared_ptr<const LayoutSet> universe;
  if (EstimatedLayoutCount(config_) <= options_.n_particles) {
    universe = CachedLayoutSet(config_, options_.n_particles);
  }
  if (universe && universe->size() > 0) {
    // Stratified start: each layout equally represented.
    for (int j = 0; j < options_.n_particles; ++j) {
      particles_.push_back((*universe)[j % universe->size()]);
    }
    return;
  }
  std::vector<ShipPlacement> placements(config_.num_ships());
  while (static_cast<int>(particles_.size()) < options_.n_particles) {
    for (int i = 0; i < config_.num_ships(); ++i) {
      const auto& options = placements_by_length_.at(config_.ship_lengths[i]);
      placements[i] = options[UniformInt(rng_, 0, static_cast<int>(options.size()) - 1)];
    }
    if (IsLegalPlacementSet(config_, placements)) particles_.emplace_back(config_, placements);
  }
}

void ParticlePolicy::Sync(const PublicState& state) {
  if (!seen_ || state.t() < static_cast<int>(processed_)) Reset(0);
  const auto& log = state.log();
  for (; processed_ < log.size(); ++processed_) {
    const Shot& shot = log[processed_];
    std::vector<Layout> survivors;
    survivors.reserve(particles_.size());
    for (auto& p : particles_) {
      if (OutcomeOf(p, *seen_, shot.cell) == shot.outcome) survivors.push_back(std::move(p));
    }
    seen_->Apply(shot.cell, shot.outcome);
    if (seen_->all_sunk()) {
      particles_ = std::move(survivors);
      continue;
    }
    if (static_cast<double>(survivors.size()) <
        options_.resample_fraction * options_.n_particles) {
      Replenish(*seen_, std::move(survivors));
    } else {
      particles_ = std::move(survivors);
    }
  }
}

bool ParticlePolicy::Construct(const PublicState& state, Layout& out) {
  const int n = config_.num_ships();
  const std::vector<int> fire_time = FireTimes(state);
  std::vector<std::int8_t> owner(config_.num_cells(), -1);
  std::vector<ShipPlacement> placed(n);
  std::vector<bool> done(n, false);

  auto cells_of = [&](int ship, const ShipPlacement& p) {
    return *PlacementCells(config_, config_.ship_lengths[ship], p);
  };
  auto place = [&](int ship, const ShipPlacement& p) {
    for (int c : cells_of(ship, p)) owner[c] = static_cast<std::int8_t>(ship);
    placed[ship] = p;
    done[ship] = true;
  };
  auto free_of_others = [&](const std::vector<int>& cells) {
    return std::all_of(cells.begin(), cells.end(), [&](int c) { return owner[c] < 0; });
  };

  std::vector<ShipPlacement> options;
  // Sunk ships: covered by hit cells, sinking cell fired last.
  for (int s = 0; s < n; ++s) {
    if (!state.sunk(s)) continue;
    options.clear();
    for (const auto& p : placements_by_length_.at(config_.ship_lengths[s])) {
      auto cells = cells_of(s, p);
      if (!free_of_others(cells)) continue;
      if (ShipAgreement(state, fire_time, cells, s) >= 0) options.push_back(p);
    }
    if (options.empty()) return false;
    place(s, options[UniformInt(rng_, 0, static_cast<int>(options.size()) - 1)]);
  }
  // Cover remaining hits with unsunk ships.
  std::vector<std::pair<int, ShipPlacement>> cover;
  for (int h = 0; h < config_.num_cells(); ++h) {
    if (!state.is_hit(h) || owner[h] >= 0) continue;
    cover.clear();
    for (int s = 0; s < n; ++s) {
      if (done[s] || state.sunk(s)) continue;
      for (const auto& p : placements_by_length_.at(config_.ship_lengths[s])) {
        auto cells = cells_of(s, p);
        if (std::find(cells.begin(), cells.end(), h) == cells.end()) continue;
        if (!free_of_others(cells)) continue;
        if (ShipAgreement(state, fire_time, cells, s) >= 0) cover.emplace_back(s, p);
      }
    }
    if (cover.empty()) return false;
    const auto& [s, p] = cover[UniformInt(rng_, 0, static_cast<int>(cover.size()) - 1)];
    place(s, p);
  }
  // Remaining ships on unfired water.
  for (int s = 0; s < n; ++s) {
    if (done[s]) continue;
    options.clear();
    for (const auto& p : placements_by_length_.at(config_.ship_lengths[s])) {
      auto cells = cells_of(s, p);
      if (!free_of_others(cells)) continue;
      if (std::all_of(cells.begin(), cells.end(),
                      [&](int c) { return !state.is_fired(c); })) {
        options.push_back(p);
      }
    }
    if (options.empty()) return false;
    place(s, options[UniformInt(rng_, 0, static_cast<int>(options.size()) - 1)]);
  }
  if (!IsLegalPlacementSet(config_, placed)) return false;
  Layout candidate(config_, placed);
  if (!IsConsistent(candidate, state)) return false;
  out = std::move(candidate);
  return true;
}

void ParticlePolicy::Rejuvenate(const PublicState& state, Layout& particle) {
  // Single-ship re-placement; uniform proposal, accepted iff the result stays
  // legal and consistent, so the uniform law on the consistent set is
  // invariant.
  static thread_local std::vector<int> fire_time;
  fire_time = FireTimes(state);
  std::vector<ShipPlacement> placements = particle.placements();
  bool changed = false;
  for (int m = 0; m < options_.rejuvenation_moves; ++m) {
    const int s = UniformInt(rng_, 0, config_.num_ships() - 1);
    const int len = config_.ship_lengths[s];
    const auto& options = placements_by_length_.at(len);
    const ShipPlacement proposal =
        options[UniformInt(rng_, 0, static_cast<int>(options.size()) - 1)];
    if (proposal == placements[s]) continue;
    const auto new_cells = *PlacementCells(config_, len, proposal);
    const auto old_cells = *PlacementCells(config_, len, placements[s]);
    const int new_fired = ShipAgreement(state, fire_time, new_cells, s);
    if (new_fired < 0) continue;
    if (new_fired != ShipAgreement(state, fire_time, old_cells, s)) continue;
    const ShipPlacement previous = placements[s];
    placements[s] = proposal;
    if (!IsLegalPlacementSet(config_, placements)) {
      placements[s] = previous;
      continue;
    }
    // Hit cells vacated by the move must still be covered.
    bool covered = true;
    for (int c : old_cells) {
      if (!state.is_hit(c)) continue;
      if (std::find(new_cells.begin(), new_cells.end(), c) != new_cells.end()) continue;
      covered = false;
      break;
    }
    if (!covered) {
      placements[s] = previous;
      continue;
    }
    changed = true;
  }
  if (changed) particle = Layout(config_, placements);
}

void ParticlePolicy::Replenish(const PublicState& state, std::vector<Layout> survivors) {
  const int n = options_.n_particles;
  if (survivors.empty()) {
    Layout built;
    for (int attempt = 0; attempt < options_.attempt_budget &&
                          static_cast<int>(survivors.size()) < n;
         ++attempt) {
      if (Construct(state, built)) survivors.push_back(built);
    }
    Require(!survivors.empty(), ErrorKind::kParticleDepletion,
            "no consistent layout found within " +
                std::to_string(options_.attempt_budget) +
                " attempts; raise n_particles");
  }
  // Systematic resampling keeps each survivor's share within one particle.
  const std::size_t s = survivors.size();
  particles_.clear();
  particles_.reserve(n);
  for (int j = 0; j < n; ++j) {
    particles_.push_back(survivors[(static_cast<std::size_t>(j) * s) / n]);
  }
  for (auto& p : particles_) Rejuvenate(state, p);
}

std::vector<double> ParticlePolicy::Marginals(const PublicState& state) {
  Sync(state);
  std::vector<double> freq(config_.num_cells(), 0.0);
  if (particles_.empty()) return freq;
  for (const auto& p : particles_) {
    for (int i = 0; i < p.num_ships(); ++i) {
      for (int c : p.ship_cells(i)) freq[c] += 1.0;
    }
  }
  for (double& f : freq) f /= static_cast<double>(particles_.size());
  return freq;
}

int ParticlePolicy::Act(const PublicState& state) {
  Sync(state);
  std::vector<double> counts(config_.num_cells(), 0.0);
  for (const auto& p : particles_) {
    for (int i = 0; i < p.num_ships(); ++i) {
      for (int c : p.ship_cells(i)) {
        if (!state.is_fired(c)) counts[c] += 1.0;
      }
    }
  }
  const int best = ArgmaxCell(counts, state);
  return best >= 0 ? best : FirstLegal(state);
}

// ---------------------------------------------------------------------------
// Tables and beliefs

std::string HistoryKey(std::span<const Shot> log) {
  if (log.empty()) return "-";
  std::string key;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (i) key += ',';
    key += std::to_string(log[i].cell);
    switch (log[i].outcome.kind) {
      case Observation::Kind::kMiss:
        key += 'm';
        break;
      case Observation::Kind::kHit:
        key += 'h';
        break;
      case Observation::Kind::kSunk:
        key += 's';
        key += std::to_string(log[i].outcome.ship);
        break;
    }
  }
  return key;
}

std::uint64_t HistoryHash(std::string_view key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : key) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void DeterministicPolicyTable::Set(const std::string& history_key, int cell) {
  auto [it, inserted] = table_.emplace(history_key, cell);
  Require(inserted || it->second == cell, ErrorKind::kInvalidArgument,
          "history '" + history_key + "' mapped to two different cells");
}

int DeterministicPolicyTable::Lookup(const std::string& history_key) const {
  auto it = table_.find(history_key);
  return it == table_.end() ? -1 : it->second;
}

void DeterministicPolicyTable::Write(std::ostream& out) const {
  for (const auto& [key, cell] : table_) {
    char hash[17];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(HistoryHash(key)));
    out << hash << '\t' << key << '\t' << cell << '\n';
  }
}

DeterministicPolicyTable DeterministicPolicyTable::Read(std::istream& in) {
  DeterministicPolicyTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string hash, key, cell;
    Require(static_cast<bool>(std::getline(fields, hash, '\t') &&
                              std::getline(fields, key, '\t') &&
                              std::getline(fields, cell)),
            ErrorKind::kIoError, "malformed policy table line '" + line + "'");
    char expected[17];
    std::snprintf(expected, sizeof(expected), "%016llx",
                  static_cast<unsigned long long>(HistoryHash(key)));
    Require(hash == expected, ErrorKind::kIoError, "hash mismatch for history '" + key + "'");
    table.Set(key, std::stoi(cell));
  }
  return table;
}

int TablePolicy::Act(const PublicState& state) {
  const std::string key = HistoryKey(state.log());
  const int cell = table_->Lookup(key);
  Require(cell >= 0, ErrorKind::kPolicyViolation,
          "policy table '" + id_ + "' has no entry for history '" + key + "'");
  return cell;
}

DeterministicPolicyTable RecordPolicyTable(AttackerPolicy& policy,
                                           const LayoutSet& universe) {
  Require(policy.deterministic(), ErrorKind::kInvalidArgument,
          "only deterministic policies can be tabulated");
  const BoardConfig& config = universe.config();
  DeterministicPolicyTable table;
  for (const Layout& layout : universe.layouts()) {
    policy.Reset(0);
    PublicState state(config);
    while (!state.all_sunk() && state.t() < config.horizon()) {
      const int a = policy.Act(state);
      Require(state.IsLegal(a), ErrorKind::kPolicyViolation,
              "policy " + policy.id() + " fired an illegal cell");
      table.Set(HistoryKey(state.log()), a);
      state.Apply(a, OutcomeOf(layout, state, a));
    }
  }
  return table;
}

std::vector<int> BeliefState::Support() const {
  std::vector<int> out;
  for (std::size_t z = 0; z < weights.size(); ++z) {
    if (weights[z] > 0.0) out.push_back(static_cast<int>(z));
  }
  return out;
}

std::vector<double> BeliefState::Marginals() const {
  std::vector<double> m(universe->config().num_cells(), 0.0);
  for (std::size_t z = 0; z < weights.size(); ++z) {
    if (weights[z] == 0.0) continue;
    const Layout& layout = (*universe)[z];
    for (int i = 0; i < layout.num_ships(); ++i) {
      for (int c : layout.ship_cells(i)) m[c] += weights[z];
    }
  }
  return m;
}

BeliefState ExactPosterior(std::span<const Shot> shot_log, const LatentDistribution& prior,
                           const BoardConfig& config) {
  Require(prior.is_explicit(), ErrorKind::kInvalidArgument,
          "exact posterior needs an explicit prior");
  Require(prior.universe().config() == config, ErrorKind::kInvalidArgument,
          "prior belongs to another board");
  const PublicState state = PublicState::FromLog(config, shot_log);
  BeliefState belief{prior.universe_ptr(), std::vector<double>(prior.universe().size(), 0.0)};
  double total = 0.0;
  for (std::size_t z = 0; z < belief.weights.size(); ++z) {
    const double w = prior.weight(z);
    if (w > 0.0 && IsConsistent(prior.universe()[z], state)) {
      belief.weights[z] = w;
      total += w;
    }
  }
  Require(total > 0.0, ErrorKind::kZeroPosterior,
          "no layout in the prior support is consistent with the shot log");
  for (double& w : belief.weights) w /= total;
  return belief;
}

}  // namespace hiddenfleet
