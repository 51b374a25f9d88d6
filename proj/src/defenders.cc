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

#include "hiddenfleet/defenders.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <variant>

#include "hiddenfleet/error.h"

namespace hiddenfleet {

std::string_view FamilyName(Family family) {
  switch (family) {
    case Family::kUniform:
      return "UNIFORM";
    case Family::kEdge:
      return "EDGE";
    case Family::kCluster:
      return "CLUSTER";
    case Family::kSpread:
      return "SPREAD";
    case Family::kParity:
      return "PARITY";
  }
  return "?";
}

Family ParseFamily(std::string_view tag) {
  for (Family f : {Family::kUniform, Family::kEdge, Family::kCluster, Family::kSpread,
                   Family::kParity}) {
    if (FamilyName(f) == tag) return f;
  }
  Fail(ErrorKind::kInvalidArgument, "unknown defender family '" + std::string(tag) + "'");
}

double DefaultStrength(Family family) {
  switch (family) {
    case Family::kUniform:
      return 0.0;
    case Family::kEdge:
      return 4.0;
    case Family::kCluster:
    case Family::kSpread:
      return 1.5;
    case Family::kParity:
      return 3.0;
  }
  return 0.0;
}

std::string FamilySpec::id() const {
  std::ostringstream os;
  os << FamilyName(family);
  if (family != Family::kUniform) os << "(" << strength << ")";
  return os.str();
}

namespace {

double MeanPairwiseCentroidDistance(const Layout& layout, const BoardConfig& config) {
  const int n = layout.num_ships();
  if (n < 2) return 0.0;
  std::vector<std::pair<double, double>> centroids;
  centroids.reserve(n);
  for (int i = 0; i < n; ++i) {
    double r = 0.0;
    double c = 0.0;
    for (int cell : layout.ship_cells(i)) {
      r += config.row(cell);
      c += config.col(cell);
    }
    const double len = static_cast<double>(layout.ship_cells(i).size());
    centroids.emplace_back(r / len, c / len);
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      total += std::hypot(centroids[i].first - centroids[j].first,
                          centroids[i].second - centroids[j].second);
    }
  }
  return total / (0.5 * n * (n - 1));
}

}  // namespace

double FamilyScore(const FamilySpec& spec, const Layout& layout,
                   const BoardConfig& config) {
  if (spec.family == Family::kUniform || spec.strength == 0.0) return 0.0;
  const double ship_cells = config.total_ship_cells();
  switch (spec.family) {
    case Family::kUniform:
      return 0.0;
    case Family::kEdge: {
      int on_edge = 0;
      for (int i = 0; i < layout.num_ships(); ++i) {
        for (int cell : layout.ship_cells(i)) {
          const int r = config.row(cell);
          const int c = config.col(cell);
          if (r == 0 || c == 0 || r == config.height - 1 || c == config.width - 1) {
            ++on_edge;
          }
        }
      }
      return spec.strength * on_edge / ship_cells;
    }
    case Family::kCluster:
      return -spec.strength * MeanPairwiseCentroidDistance(layout, config);
    case Family::kSpread:
      return spec.strength * MeanPairwiseCentroidDistance(layout, config);
    case Family::kParity: {
      int even = 0;
      for (int i = 0; i < layout.num_ships(); ++i) {
        for (int cell : layout.ship_cells(i)) {
          if ((config.row(cell) + config.col(cell)) % 2 == 0) ++even;
        }
      }
      return spec.strength * even / ship_cells;
    }
  }
  return 0.0;
}

namespace {

// Per-length placement tables for fast samplers.
class PlacementTable {
 public:
  explicit PlacementTable(const BoardConfig& config) : config_(config) {
    for (int len : config.ship_lengths) {
      if (!by_length_.count(len)) by_length_[len] = AllPlacements(config, len);
    }
  }

  const std::vector<ShipPlacement>& for_ship(int ship) const {
    return by_length_.at(config_.ship_lengths[ship]);
  }

  Layout SampleUniform(Rng& rng) const {
    std::vector<ShipPlacement> placements(config_.num_ships());
    for (;;) {
      for (int i = 0; i < config_.num_ships(); ++i) {
        const auto& options = for_ship(i);
        placements[i] = options[UniformInt(rng, 0, static_cast<int>(options.size()) - 1)];
      }
      if (IsLegalPlacementSet(config_, placements)) return Layout(config_, placements);
    }
  }

 private:
  const BoardConfig& config_;
  std::map<int, std::vector<ShipPlacement>> by_length_;
};

// Metropolis chain over layouts with target proportional to exp(score). The
// proposal re-places one uniformly chosen ship uniformly at random, which is
// symmetric; illegal proposals are rejected.
class MetropolisChain {
 public:
  MetropolisChain(const BoardConfig& config, const FamilySpec& spec, std::uint64_t seed)
      : config_(config), spec_(spec), table_(config), rng_(seed) {
    state_ = table_.SampleUniform(rng_);
    score_ = FamilyScore(spec_, state_, config_);
  }

  void Advance(int steps) {
    std::vector<ShipPlacement> proposal;
    for (int s = 0; s < steps; ++s) {
      const int ship = UniformInt(rng_, 0, config_.num_ships() - 1);
      const auto& options = table_.for_ship(ship);
      proposal = state_.placements();
      proposal[ship] = options[UniformInt(rng_, 0, static_cast<int>(options.size()) - 1)];
      if (!IsLegalPlacementSet(config_, proposal)) continue;
      Layout candidate(config_, proposal);
      const double candidate_score = FamilyScore(spec_, candidate, config_);
      const double log_ratio = candidate_score - score_;
      if (log_ratio >= 0.0 || UniformReal(rng_) < std::exp(log_ratio)) {
        state_ = std::move(candidate);
        score_ = candidate_score;
      }
    }
  }

  const Layout& state() const { return state_; }

 private:
  const BoardConfig& config_;
  FamilySpec spec_;
  PlacementTable table_;
  Rng rng_;
  Layout state_;
  double score_ = 0.0;
};

}  // namespace

Layout SampleUniformLayout(const BoardConfig& config, Rng& rng) {
  config.Validate();
  return PlacementTable(config).SampleUniform(rng);
}

struct LatentDistribution::ExplicitData {
  std::shared_ptr<const LayoutSet> universe;
  std::vector<double> weights;
  std::vector<double> cumulative;
};

struct LatentDistribution::ScoredData {
  BoardConfig config;
  FamilySpec spec;
  SamplerSettings sampler;
  mutable std::mutex mu;
  mutable bool materialized = false;
  mutable std::optional<LatentDistribution> exact;
};

struct LatentDistribution::MixtureData {
  std::vector<LatentDistribution> components;
  std::vector<double> weights;
};

struct LatentDistribution::Impl {
  std::string id;
  std::variant<ExplicitData, std::shared_ptr<ScoredData>, MixtureData> data;
};

LatentDistribution::LatentDistribution(std::shared_ptr<const Impl> impl)
    : impl_(std::move(impl)) {}

LatentDistribution LatentDistribution::Explicit(std::shared_ptr<const LayoutSet> universe,
                                                std::vector<double> weights,
                                                std::string id) {
  Require(universe != nullptr, ErrorKind::kInvalidArgument, "null layout universe");
  Require(weights.size() == universe->size(), ErrorKind::kWeightMismatch,
          "explicit weights have size " + std::to_string(weights.size()) +
              " but the universe has " + std::to_string(universe->size()) + " layouts");
  double total = 0.0;
  for (double w : weights) {
    Require(std::isfinite(w) && w >= 0.0, ErrorKind::kWeightMismatch,
            "explicit weights must be finite and nonnegative");
    total += w;
  }
  Require(total > 0.0, ErrorKind::kEmptySupport, "distribution '" + id + "' has no mass");
  Require(std::abs(total - 1.0) <= 1e-9, ErrorKind::kWeightMismatch,
          "explicit weights sum to " + std::to_string(total) + ", not 1");
  for (double& w : weights) w /= total;
  ExplicitData data;
  data.universe = std::move(universe);
  data.cumulative.resize(weights.size());
  std::partial_sum(weights.begin(), weights.end(), data.cumulative.begin());
  data.weights = std::move(weights);
  auto impl = std::make_shared<Impl>();
  impl->id = std::move(id);
  impl->data = std::move(data);
  return LatentDistribution(std::move(impl));
}

LatentDistribution LatentDistribution::FromUnnormalized(
    std::shared_ptr<const LayoutSet> universe, std::vector<double> weights,
    std::string id) {
  double total = 0.0;
  for (double w : weights) {
    Require(std::isfinite(w) && w >= 0.0, ErrorKind::kWeightMismatch,
            "weights must be finite and nonnegative");
    total += w;
  }
  Require(total > 0.0, ErrorKind::kEmptySupport, "distribution '" + id + "' has no mass");
  for (double& w : weights) w /= total;
  return Explicit(std::move(universe), std::move(weights), std::move(id));
}

LatentDistribution LatentDistribution::PointMass(std::shared_ptr<const LayoutSet> universe,
                                                 std::size_t index) {
  Require(universe && index < universe->size(), ErrorKind::kInvalidArgument,
          "point mass index out of range");
  std::vector<double> w(universe->size(), 0.0);
  w[index] = 1.0;
  return Explicit(std::move(universe), std::move(w), "point:" + std::to_string(index));
}

LatentDistribution LatentDistribution::UniformOver(
    std::shared_ptr<const LayoutSet> universe) {
  Require(universe && universe->size() > 0, ErrorKind::kEmptySupport,
          "empty layout universe");
  const std::size_t n = universe->size();
  return Explicit(std::move(universe), std::vector<double>(n, 1.0 / n), "UNIFORM");
}

LatentDistribution LatentDistribution::Scored(const BoardConfig& config, FamilySpec spec,
                                              SamplerSettings sampler) {
  config.Validate();
  Require(std::isfinite(spec.strength), ErrorKind::kInvalidArgument,
          "family strength must be finite");
  Require(sampler.burn_in >= 0 && sampler.thinning >= 1, ErrorKind::kInvalidArgument,
          "sampler burn_in must be >= 0 and thinning >= 1");
  auto data = std::make_shared<ScoredData>();
  data->config = config;
  data->spec = spec;
  data->sampler = sampler;
  auto impl = std::make_shared<Impl>();
  impl->id = spec.id();
  impl->data = std::move(data);
  return LatentDistribution(std::move(impl));
}

LatentDistribution LatentDistribution::Mixture(std::vector<LatentDistribution> components,
                                               std::vector<double> weights) {
  Require(!components.empty() && components.size() == weights.size(),
          ErrorKind::kWeightMismatch, "mixture needs one weight per component");
  double total = 0.0;
  for (double w : weights) {
    Require(std::isfinite(w) && w >= 0.0, ErrorKind::kWeightMismatch,
            "mixture weights must be nonnegative");
    total += w;
  }
  Require(std::abs(total - 1.0) <= 1e-9, ErrorKind::kWeightMismatch,
          "mixture weights must sum to 1");
  std::ostringstream id;
  id << "mix(";
  for (std::size_t i = 0; i < components.size(); ++i) {
    id << (i ? "+" : "") << weights[i] << "*" << components[i].id();
  }
  id << ")";

  const bool all_explicit =
      std::all_of(components.begin(), components.end(),
                  [&](const LatentDistribution& d) {
                    return d.is_explicit() &&
                           d.universe_ptr() == components.front().universe_ptr();
                  });
  if (all_explicit) {
    std::vector<double> blended(components.front().universe().size(), 0.0);
    for (std::size_t i = 0; i < components.size(); ++i) {
      const auto& w = components[i].weights();
      for (std::size_t z = 0; z < blended.size(); ++z) blended[z] += weights[i] * w[z];
    }
    return FromUnnormalized(components.front().universe_ptr(), std::move(blended),
                            id.str());
  }
  auto impl = std::make_shared<Impl>();
  impl->id = id.str();
  impl->data = MixtureData{std::move(components), std::move(weights)};
  return LatentDistribution(std::move(impl));
}

bool LatentDistribution::is_explicit() const {
  return std::holds_alternative<ExplicitData>(impl_->data);
}
bool LatentDistribution::is_scored() const {
  return std::holds_alternative<std::shared_ptr<ScoredData>>(impl_->data);
}
bool LatentDistribution::is_mixture() const {
  return std::holds_alternative<MixtureData>(impl_->data);
}
const std::string& LatentDistribution::id() const { return impl_->id; }

const LayoutSet& LatentDistribution::universe() const { return *universe_ptr(); }

std::shared_ptr<const LayoutSet> LatentDistribution::universe_ptr() const {
  Require(is_explicit(), ErrorKind::kInvalidArgument,
          "distribution '" + id() + "' is not explicit");
  return std::get<ExplicitData>(impl_->data).universe;
}

const std::vector<double>& LatentDistribution::weights() const {
  Require(is_explicit(), ErrorKind::kInvalidArgument,
          "distribution '" + id() + "' is not explicit");
  return std::get<ExplicitData>(impl_->data).weights;
}

const FamilySpec& LatentDistribution::family() const {
  Require(is_scored(), ErrorKind::kInvalidArgument,
          "distribution '" + id() + "' is not a scored family");
  return std::get<std::shared_ptr<ScoredData>>(impl_->data)->spec;
}

std::optional<LatentDistribution> LatentDistribution::Materialize(
    const BoardConfig& config, std::int64_t guard) const {
  if (const auto* e = std::get_if<ExplicitData>(&impl_->data)) {
    Require(e->universe->config() == config, ErrorKind::kInvalidArgument,
            "distribution '" + id() + "' belongs to another board");
    return *this;
  }
  if (const auto* s = std::get_if<std::shared_ptr<ScoredData>>(&impl_->data)) {
    const ScoredData& data = **s;
    Require(data.config == config, ErrorKind::kInvalidArgument,
            "distribution '" + id() + "' belongs to another board");
    std::lock_guard<std::mutex> lock(data.mu);
    if (!data.materialized) {
      data.materialized = true;
      auto universe = CachedLayoutSet(config, std::min(guard, data.sampler.enumeration_guard));
      if (universe) {
        std::vector<double> scores(universe->size());
        for (std::size_t z = 0; z < universe->size(); ++z) {
          scores[z] = FamilyScore(data.spec, (*universe)[z], config);
        }
        const double top = *std::max_element(scores.begin(), scores.end());
        for (double& s : scores) s = std::exp(s - top);
        data.exact = FromUnnormalized(universe, std::move(scores), id());
      }
    }
    return data.exact;
  }
  const auto& mix = std::get<MixtureData>(impl_->data);
  std::vector<LatentDistribution> parts;
  for (const auto& c : mix.components) {
    auto m = c.Materialize(config, guard);
    if (!m) return std::nullopt;
    parts.push_back(*m);
  }
  auto collapsed = Mixture(std::move(parts), mix.weights);
  if (!collapsed.is_explicit()) return std::nullopt;
  return collapsed;
}

Layout LatentDistribution::Sample(const BoardConfig& config, std::uint64_t seed) const {
  if (const auto* e = std::get_if<ExplicitData>(&impl_->data)) {
    Require(e->universe->config() == config, ErrorKind::kInvalidArgument,
            "distribution '" + id() + "' belongs to another board");
    Rng rng(seed);
    const double u = UniformReal(rng) * e->cumulative.back();
    auto it = std::upper_bound(e->cumulative.begin(), e->cumulative.end(), u);
    std::size_t idx = std::min<std::size_t>(it - e->cumulative.begin(),
                                            e->weights.size() - 1);
    // Never land on a zero-weight layout through rounding at the boundary.
    while (e->weights[idx] == 0.0 && idx > 0) --idx;
    while (e->weights[idx] == 0.0) ++idx;
    return (*e->universe)[idx];
  }
  if (const auto* s = std::get_if<std::shared_ptr<ScoredData>>(&impl_->data)) {
    const ScoredData& data = **s;
    Require(data.config == config, ErrorKind::kInvalidArgument,
            "distribution '" + id() + "' belongs to another board");
    if (auto exact = Materialize(config)) return exact->Sample(config, seed);
    if (data.spec.family == Family::kUniform || data.spec.strength == 0.0) {
      Rng rng(seed);
      return SampleUniformLayout(config, rng);
    }
    MetropolisChain chain(config, data.spec, seed);
    chain.Advance(data.sampler.burn_in);
    return chain.state();
  }
  const auto& mix = std::get<MixtureData>(impl_->data);
  Rng rng(seed);
  double u = UniformReal(rng);
  std::size_t pick = mix.components.size() - 1;
  for (std::size_t i = 0; i < mix.weights.size(); ++i) {
    if (u < mix.weights[i]) {
      pick = i;
      break;
    }
    u -= mix.weights[i];
  }
  while (mix.weights[pick] == 0.0 && pick > 0) --pick;
  return mix.components[pick].Sample(config, DeriveSeed(seed, {1}));
}

std::vector<Layout> LatentDistribution::SampleMany(const BoardConfig& config, int n,
                                                   std::uint64_t seed) const {
  std::vector<Layout> out;
  out.reserve(std::max(n, 0));
  if (const auto* s = std::get_if<std::shared_ptr<ScoredData>>(&impl_->data)) {
    const ScoredData& data = **s;
    const bool trivial = data.spec.family == Family::kUniform || data.spec.strength == 0.0;
    if (!trivial && data.config == config && !Materialize(config)) {
      MetropolisChain chain(config, data.spec, seed);
      chain.Advance(data.sampler.burn_in);
      for (int i = 0; i < n; ++i) {
        chain.Advance(data.sampler.thinning);
        out.push_back(chain.state());
      }
      return out;
    }
    if (trivial && data.config == config && !Materialize(config)) {
      PlacementTable table(config);
      Rng rng(seed);
      for (int i = 0; i < n; ++i) out.push_back(table.SampleUniform(rng));
      return out;
    }
  }
  for (int i = 0; i < n; ++i) out.push_back(Sample(config, DeriveSeed(seed, {std::uint64_t(i)})));
  return out;
}

LatentDistribution LoadExplicitWeightsCsv(std::istream& in,
                                          std::shared_ptr<const LayoutSet> universe,
                                          std::string id) {
  Require(universe != nullptr, ErrorKind::kInvalidArgument, "null layout universe");
  std::vector<double> weights(universe->size(), 0.0);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.rfind("layout_id", 0) == 0) continue;
    const auto comma = line.find(',');
    Require(comma != std::string::npos, ErrorKind::kConfigError,
            "weight file line " + std::to_string(line_no) + " is not 'layout_id,weight'");
    long idx = -1;
    double w = 0.0;
    try {
      idx = std::stol(line.substr(0, comma));
      w = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      Fail(ErrorKind::kConfigError, "weight file line " + std::to_string(line_no) +
                                        " does not parse");
    }
    Require(idx >= 0 && static_cast<std::size_t>(idx) < weights.size(),
            ErrorKind::kWeightMismatch,
            "weight file layout id " + std::to_string(idx) + " out of range");
    weights[idx] += w;
  }
  return LatentDistribution::FromUnnormalized(std::move(universe), std::move(weights), std::move(id));
}

DefenderPolytope::DefenderPolytope(std::vector<LatentDistribution> generators)
    : generators_(std::move(generators)) {
  Require(!generators_.empty(), ErrorKind::kInvalidArgument,
          "defender polytope needs at least one generator");
  for (const auto& g : generators_) {
    Require(g.is_explicit(), ErrorKind::kInvalidArgument,
            "polytope generator '" + g.id() + "' is not explicit");
    Require(g.universe_ptr() == generators_.front().universe_ptr() ||
                g.universe().layouts() == generators_.front().universe().layouts(),
            ErrorKind::kInvalidArgument, "polytope generators use different universes");
  }
}

DefenderPolytope DefenderPolytope::Simplex(std::shared_ptr<const LayoutSet> universe) {
  std::vector<LatentDistribution> gens;
  gens.reserve(universe->size());
  for (std::size_t z = 0; z < universe->size(); ++z) {
    gens.push_back(LatentDistribution::PointMass(universe, z));
  }
  return DefenderPolytope(std::move(gens));
}

std::vector<LatentDistribution> PolytopeExtremePoints(const DefenderPolytope& polytope) {
  std::vector<LatentDistribution> out;
  for (const auto& g : polytope.generators()) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const LatentDistribution& o) {
      return o.weights() == g.weights();
    });
    if (!seen) out.push_back(g);
  }
  return out;
}

int AdjacentOccupiedPairs(const Layout& layout, const BoardConfig& config) {
  int pairs = 0;
  for (int cell = 0; cell < config.num_cells(); ++cell) {
    if (!layout.occupied(cell)) continue;
    const int r = config.row(cell);
    const int c = config.col(cell);
    if (c + 1 < config.width && layout.occupied(cell + 1)) ++pairs;
    if (r + 1 < config.height && layout.occupied(cell + config.width)) ++pairs;
  }
  return pairs;
}

namespace {

std::vector<double> ExactMarginals(const LatentDistribution& dist) {
  const LayoutSet& universe = dist.universe();
  std::vector<double> marginals(universe.config().num_cells(), 0.0);
  for (std::size_t z = 0; z < universe.size(); ++z) {
    const double w = dist.weight(z);
    if (w == 0.0) continue;
    for (int i = 0; i < universe[z].num_ships(); ++i) {
      for (int cell : universe[z].ship_cells(i)) marginals[cell] += w;
    }
  }
  return marginals;
}

double BernoulliEntropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

// Share of a row (or column) index on the low side of the board midline.
double LowSideShare(int index, int extent) {
  const double center = index + 0.5;
  const double mid = extent / 2.0;
  if (center < mid) return 1.0;
  if (center > mid) return 0.0;
  return 0.5;
}

}  // namespace

const std::vector<double>& UniformReferenceMarginals(const BoardConfig& config) {
  static std::mutex mu;
  static std::map<std::string, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(config.Key());
  if (it != cache.end()) return it->second;
  std::vector<double> marginals;
  if (auto universe = CachedLayoutSet(config)) {
    marginals = ExactMarginals(LatentDistribution::UniformOver(universe));
  } else {
    marginals.assign(config.num_cells(), 0.0);
    PlacementTable table(config);
    Rng rng(kUniformReferenceSeed);
    for (int s = 0; s < kUniformReferenceSamples; ++s) {
      Layout layout = table.SampleUniform(rng);
      for (int i = 0; i < layout.num_ships(); ++i) {
        for (int cell : layout.ship_cells(i)) marginals[cell] += 1.0;
      }
    }
    for (double& m : marginals) m /= kUniformReferenceSamples;
  }
  return cache.emplace(config.Key(), std::move(marginals)).first->second;
}

ShiftMetrics ShiftMetricsFromMarginals(const std::vector<double>& marginals,
                                       double cluster_score, const BoardConfig& config,
                                       int sample_count) {
  const auto& reference = UniformReferenceMarginals(config);
  ShiftMetrics m;
  m.sample_count = sample_count;
  m.cluster_score = cluster_score;
  double l1 = 0.0;
  double entropy = 0.0;
  double quadrant[4] = {0.0, 0.0, 0.0, 0.0};
  double total = 0.0;
  for (int cell = 0; cell < config.num_cells(); ++cell) {
    const double p = marginals[cell];
    l1 += std::abs(p - reference[cell]);
    entropy += BernoulliEntropy(p);
    const double top = LowSideShare(config.row(cell), config.height);
    const double left = LowSideShare(config.col(cell), config.width);
    quadrant[0] += p * top * left;
    quadrant[1] += p * top * (1.0 - left);
    quadrant[2] += p * (1.0 - top) * left;
    quadrant[3] += p * (1.0 - top) * (1.0 - left);
    total += p;
  }
  m.centroid_dist_mean =
      l1 * config.num_cells() / (2.0 * config.total_ship_cells());
  m.marginal_entropy = entropy / config.num_cells();
  if (total > 0.0) {
    double mean = 0.0;
    for (double& q : quadrant) {
      q /= total;
      mean += q / 4.0;
    }
    double var = 0.0;
    for (double q : quadrant) var += (q - mean) * (q - mean) / 4.0;
    m.quadrant_mass_std = std::sqrt(var);
  }
  return m;
}

ShiftMetrics ComputeShiftMetrics(const LatentDistribution& dist, const BoardConfig& config,
                                 int n_samples, std::uint64_t seed) {
  Require(n_samples >= 100, ErrorKind::kInvalidArgument,
          "shift metrics need at least 100 samples");
  if (dist.is_explicit()) {
    double cluster = 0.0;
    const LayoutSet& universe = dist.universe();
    for (std::size_t z = 0; z < universe.size(); ++z) {
      if (dist.weight(z) > 0.0) {
        cluster += dist.weight(z) * AdjacentOccupiedPairs(universe[z], config);
      }
    }
    return ShiftMetricsFromMarginals(ExactMarginals(dist), cluster, config, n_samples);
  }
  const auto samples = dist.SampleMany(config, n_samples, seed);
  std::vector<double> marginals(config.num_cells(), 0.0);
  double cluster = 0.0;
  for (const Layout& layout : samples) {
    for (int i = 0; i < layout.num_ships(); ++i) {
      for (int cell : layout.ship_cells(i)) marginals[cell] += 1.0;
    }
    cluster += AdjacentOccupiedPairs(layout, config);
  }
  for (double& p : marginals) p /= n_samples;
  cluster /= n_samples;
  if (dist.is_scored() && dist.family().family == Family::kUniform) {
    return ShiftMetricsFromMarginals(UniformReferenceMarginals(config), cluster, config,
                                     n_samples);
  }
  return ShiftMetricsFromMarginals(marginals, cluster, config, n_samples);
}

void WriteShiftMetricsCsv(std::ostream& out,
                          std::span<const std::pair<std::string, ShiftMetrics>> rows) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::fixed << std::setprecision(6);
  os << "defender,CentroidDistMean,ClusterScore,MarginalEntropy,QuadrantMassStd,samples\n";
  for (const auto& [name, m] : rows) {
    os << name << ',' << m.centroid_dist_mean << ',' << m.cluster_score << ','
       << m.marginal_entropy << ',' << m.quadrant_mass_std << ',' << m.sample_count
       << '\n';
  }
  out << os.str();
}

}  // namespace hiddenfleet
