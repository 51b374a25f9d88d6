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

#include "hiddenfleet/exact_game.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "hiddenfleet/format.h"
#include "hiddenfleet/matrix_game.h"

namespace hiddenfleet {

void LossMatrix::AddRow(std::string id, std::vector<int> losses) {
  Require(universe_ != nullptr && losses.size() == universe_->size(),
          ErrorKind::kDimensionMismatch, "loss row length does not match the universe");
  ids_.push_back(std::move(id));
  entries_.push_back(std::move(losses));
}

void LossMatrix::WriteCsv(std::ostream& out) const {
  out << "policy";
  for (std::size_t z = 0; z < cols(); ++z) out << ",z" << z;
  out << "\n";
  for (std::size_t r = 0; r < rows(); ++r) {
    out << ids_[r];
    for (int v : entries_[r]) out << ',' << v;
    out << "\n";
  }
}

std::vector<int> PolicyLosses(AttackerPolicy& policy, const LayoutSet& universe) {
  Require(policy.deterministic(), ErrorKind::kInvalidArgument,
          "loss rows need a deterministic policy: " + policy.id());
  std::vector<int> out;
  out.reserve(universe.size());
  for (const Layout& layout : universe.layouts()) {
    out.push_back(Rollout(policy, layout, universe.config(), 0).tau);
  }
  return out;
}

std::vector<double> ExpectedLossPerLayout(AttackerPolicy& policy,
                                          const LayoutSet& universe,
                                          int episodes_per_layout, std::uint64_t seed) {
  Require(episodes_per_layout >= 1, ErrorKind::kInvalidArgument,
          "episodes_per_layout must be >= 1");
  const int reps = policy.deterministic() ? 1 : episodes_per_layout;
  std::vector<double> out(universe.size(), 0.0);
  for (std::size_t z = 0; z < universe.size(); ++z) {
    double total = 0.0;
    for (int e = 0; e < reps; ++e) {
      total += Rollout(policy, universe[z], universe.config(),
                       DeriveSeed(seed, {z, static_cast<std::uint64_t>(e)}))
                   .tau;
    }
    out[z] = total / reps;
  }
  return out;
}

LossMatrix BuildLossMatrix(std::span<AttackerPolicy* const> policies,
                           std::shared_ptr<const LayoutSet> universe) {
  LossMatrix m(universe);
  for (AttackerPolicy* p : policies) m.AddRow(p->id(), PolicyLosses(*p, *universe));
  return m;
}

double ValueBilinear(std::span<const double> mu, const LatentDistribution& rho,
                     const LossMatrix& matrix) {
  Require(rho.is_explicit(), ErrorKind::kDimensionMismatch, "rho must be explicit");
  Require(mu.size() == matrix.rows(), ErrorKind::kDimensionMismatch,
          "mu length does not match the matrix rows");
  Require(rho.weights().size() == matrix.cols(), ErrorKind::kDimensionMismatch,
          "rho length does not match the matrix columns");
  const auto& w = rho.weights();
  double v = 0.0;
  for (std::size_t r = 0; r < mu.size(); ++r) {
    if (mu[r] == 0.0) continue;
    double row = 0.0;
    for (std::size_t z = 0; z < w.size(); ++z) row += w[z] * matrix.at(r, z);
    v += mu[r] * row;
  }
  return v;
}

double ExpectedLoss(AttackerPolicy& policy, const LatentDistribution& rho,
                    int episodes_per_layout, std::uint64_t seed) {
  Require(rho.is_explicit(), ErrorKind::kInvalidArgument, "rho must be explicit");
  const auto losses = ExpectedLossPerLayout(policy, rho.universe(), episodes_per_layout, seed);
  double v = 0.0;
  for (std::size_t z = 0; z < losses.size(); ++z) v += rho.weight(z) * losses[z];
  return v;
}

namespace {

constexpr double kTieTol = 1e-12;

// Expectimax over information states. A state is the outcome-labelled fired
// set, encoded per cell: 0 unknown, 1 miss, 2 hit, 3+i the shot that sank
// ship i, together with its support (the consistent universe layouts;
// zero-weight ones ride along so the resulting policy is total). The support
// is part of the memo key because a sunk event constrains which hits came
// before it, so the unordered fired set alone does not pin down the
// posterior.
class BestResponseDp {
 public:
  BestResponseDp(const LayoutSet& universe, const std::vector<double>& weights,
                 int horizon)
      : universe_(universe),
        weights_(weights),
        horizon_(horizon),
        num_ships_(universe.config().num_ships()),
        num_cells_(universe.config().num_cells()) {}

  struct Node {
    double cost = 0.0;        // rho-weighted expected remaining shots
    double count_cost = 0.0;  // same, counting every layout once
    int action = -1;
  };

  Node Solve(std::string& codes, const std::vector<int>& support, int t, int sunk) {
    if (sunk == num_ships_ || t == horizon_ || support.empty()) return {};
    std::string key = Key(codes, support);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    double mass = 0.0;
    std::vector<double> hit_mass(num_cells_, 0.0);
    std::vector<int> hit_count(num_cells_, 0);
    for (int z : support) {
      mass += weights_[z];
      const Layout& layout = universe_[z];
      for (int s = 0; s < num_ships_; ++s) {
        for (int c : layout.ship_cells(s)) {
          if (codes[c] != 0) continue;
          hit_mass[c] += weights_[z];
          ++hit_count[c];
        }
      }
    }
    const double count = static_cast<double>(support.size());

    Node best;
    double best_hit = -1.0;
    std::vector<std::vector<int>> groups(3 + num_ships_);
    for (int a = 0; a < num_cells_; ++a) {
      // Cells no consistent layout occupies are dominated: a sure miss.
      if (codes[a] != 0 || hit_count[a] == 0) continue;
      for (auto& g : groups) g.clear();
      for (int z : support) groups[OutcomeCode(universe_[z], codes, a)].push_back(z);
      Node cand{mass, count, a};
      for (std::size_t code = 1; code < groups.size(); ++code) {
        if (groups[code].empty()) continue;
        codes[a] = static_cast<char>(code);
        const Node child =
            Solve(codes, groups[code], t + 1, sunk + (code >= 3 ? 1 : 0));
        codes[a] = 0;
        cand.cost += child.cost;
        cand.count_cost += child.count_cost;
      }
      if (Better(cand, hit_mass[a], best, best_hit)) {
        best = cand;
        best_hit = hit_mass[a];
      }
    }
    memo_.emplace(std::move(key), best);
    return best;
  }

  int Action(const std::string& codes, const std::vector<int>& support) const {
    auto it = memo_.find(Key(codes, support));
    return it == memo_.end() ? -1 : it->second.action;
  }

  int OutcomeCode(const Layout& layout, const std::string& codes, int a) const {
    const int ship = layout.owner(a);
    if (ship < 0) return 1;
    for (int c : layout.ship_cells(ship)) {
      if (c != a && codes[c] == 0) return 2;
    }
    return 3 + ship;
  }

 private:
  std::string Key(const std::string& codes, const std::vector<int>& support) const {
    std::string key = codes;
    key.append((universe_.size() + 7) / 8, '\0');
    for (int z : support) key[codes.size() + z / 8] |= static_cast<char>(1 << (z % 8));
    return key;
  }

  static bool Better(const Node& cand, double cand_hit, const Node& best,
                     double best_hit) {
    if (best.action < 0) return true;
    if (cand.cost < best.cost - kTieTol) return true;
    if (cand.cost > best.cost + kTieTol) return false;
    if (cand_hit > best_hit + kTieTol) return true;
    if (cand_hit < best_hit - kTieTol) return false;
    return cand.count_cost < best.count_cost - 1e-9;
  }

  const LayoutSet& universe_;
  const std::vector<double>& weights_;
  int horizon_;
  int num_ships_;
  int num_cells_;
  std::unordered_map<std::string, Node> memo_;
};

std::string TableId(const DeterministicPolicyTable& table) {
  std::ostringstream os;
  table.Write(os);
  char buf[24];
  std::snprintf(buf, sizeof buf, "br-%016llx",
                static_cast<unsigned long long>(HistoryHash(os.str())));
  return buf;
}

void CheckGuards(const BoardConfig& config, const LayoutSet& universe,
                 const ExactGuards& guards) {
  Require(config.num_cells() <= guards.max_cells, ErrorKind::kGuardExceeded,
          "exact best response needs at most " + std::to_string(guards.max_cells) +
              " cells; use a heuristic trainer");
  Require(static_cast<std::int64_t>(universe.size()) <= guards.max_layouts,
          ErrorKind::kGuardExceeded,
          "exact best response needs at most " + std::to_string(guards.max_layouts) +
              " layouts; use a heuristic trainer");
}

}  // namespace

BestResponse AttackerBestResponse(const LatentDistribution& rho, const BoardConfig& config,
                                  const ExactGuards& guards) {
  Require(rho.is_explicit(), ErrorKind::kInvalidArgument,
          "exact best response needs an explicit distribution");
  const LayoutSet& universe = rho.universe();
  Require(universe.config() == config, ErrorKind::kInvalidArgument,
          "distribution universe belongs to another board");
  CheckGuards(config, universe, guards);

  BestResponseDp dp(universe, rho.weights(), config.horizon());
  std::string codes(config.num_cells(), '\0');
  std::vector<int> all(universe.size());
  for (std::size_t z = 0; z < all.size(); ++z) all[z] = static_cast<int>(z);
  const auto root = dp.Solve(codes, all, 0, 0);

  auto table = std::make_shared<DeterministicPolicyTable>();
  BestResponse out;
  out.losses.reserve(universe.size());
  for (const Layout& layout : universe.layouts()) {
    PublicState state(config);
    std::string c(config.num_cells(), '\0');
    std::vector<int> support = all;
    while (!state.all_sunk() && state.t() < config.horizon()) {
      const int a = dp.Action(c, support);
      Require(a >= 0, ErrorKind::kInconsistentState, "best-response DP left a gap");
      table->Set(HistoryKey(state.log()), a);
      const Observation obs = OutcomeOf(layout, state, a);
      const int code = dp.OutcomeCode(layout, c, a);
      std::erase_if(support, [&](int z) { return dp.OutcomeCode(universe[z], c, a) != code; });
      c[a] = static_cast<char>(code);
      state.Apply(a, obs);
    }
    out.losses.push_back(state.t());
  }
  double value = 0.0;
  for (std::size_t z = 0; z < universe.size(); ++z) value += rho.weight(z) * out.losses[z];
  Require(std::abs(value - root.cost) <= 1e-9 * std::max(1.0, value),
          ErrorKind::kInconsistentState, "best-response table disagrees with the DP value");
  out.value = value;
  out.id = TableId(*table);
  out.table = std::move(table);
  return out;
}

DefenderResponse DefenderBestResponse(std::span<const double> per_layout_loss,
                                      const DefenderPolytope& polytope) {
  Require(per_layout_loss.size() == polytope.dimension(), ErrorKind::kDimensionMismatch,
          "loss vector does not match the polytope dimension");
  const auto gens = PolytopeExtremePoints(polytope);
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < gens.size(); ++j) {
    double v = 0.0;
    for (std::size_t z = 0; z < per_layout_loss.size(); ++z) {
      v += gens[j].weight(z) * per_layout_loss[z];
    }
    if (v > best_value) {
      best_value = v;
      best = j;
    }
  }
  return {best, gens[best], best_value};
}

DefenderResponse DefenderBestResponse(std::span<const double> mu, const LossMatrix& matrix,
                                      const DefenderPolytope& polytope) {
  Require(mu.size() == matrix.rows(), ErrorKind::kDimensionMismatch,
          "mu length does not match the matrix rows");
  std::vector<double> loss(matrix.cols(), 0.0);
  for (std::size_t r = 0; r < mu.size(); ++r) {
    for (std::size_t z = 0; z < loss.size(); ++z) loss[z] += mu[r] * matrix.at(r, z);
  }
  return DefenderBestResponse(loss, polytope);
}

DefenderResponse DefenderBestResponse(AttackerPolicy& policy,
                                      const DefenderPolytope& polytope,
                                      int episodes_per_layout, std::uint64_t seed) {
  const auto loss =
      ExpectedLossPerLayout(policy, polytope.universe(), episodes_per_layout, seed);
  return DefenderBestResponse(loss, polytope);
}

LatentDistribution GameSolution::rho() const {
  return LatentDistribution::FromUnnormalized(universe, rho_weights, "minimax-rho");
}

GameSolution DoubleOracleSolve(const BoardConfig& config, const DefenderPolytope& polytope,
                               double gap_tol, int max_iters, const ExactGuards& guards) {
  Require(gap_tol >= 0.0, ErrorKind::kInvalidArgument, "gap_tol must be >= 0");
  Require(max_iters >= 1, ErrorKind::kInvalidArgument, "max_iters must be >= 1");
  const auto universe = polytope.universe_ptr();
  Require(universe->config() == config, ErrorKind::kInvalidArgument,
          "polytope universe belongs to another board");
  CheckGuards(config, *universe, guards);

  const auto gens = PolytopeExtremePoints(polytope);
  const std::size_t m = gens.size();
  const std::size_t nz = universe->size();

  std::vector<BestResponse> policies;
  // expected[r][j] = E_{generator j}[tau(policy r)]
  std::vector<std::vector<double>> expected;
  auto add_policy = [&](BestResponse br) {
    std::vector<double> row(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t z = 0; z < nz; ++z) row[j] += gens[j].weight(z) * br.losses[z];
    }
    expected.push_back(std::move(row));
    policies.push_back(std::move(br));
  };

  std::vector<double> bary(nz, 0.0);
  for (const auto& g : gens) {
    for (std::size_t z = 0; z < nz; ++z) bary[z] += g.weight(z) / m;
  }
  add_policy(AttackerBestResponse(
      LatentDistribution::FromUnnormalized(universe, bary, "barycenter"), config, guards));
  std::vector<std::size_t> cols = {static_cast<std::size_t>(
      std::max_element(expected[0].begin(), expected[0].end()) - expected[0].begin())};

  std::vector<IterationRecord> trace;
  std::optional<GameSolution> best;
  for (int it = 1; it <= max_iters; ++it) {
    std::vector<std::vector<double>> restricted(policies.size(),
                                                std::vector<double>(cols.size()));
    for (std::size_t r = 0; r < policies.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) restricted[r][c] = expected[r][cols[c]];
    }
    const MatrixGameSolution lp = SolveZeroSumGame(restricted);

    std::vector<double> gen_w(m, 0.0);
    for (std::size_t c = 0; c < cols.size(); ++c) gen_w[cols[c]] += lp.col_strategy[c];
    std::vector<double> rho_w(nz, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      if (gen_w[j] == 0.0) continue;
      for (std::size_t z = 0; z < nz; ++z) rho_w[z] += gen_w[j] * gens[j].weight(z);
    }
    BestResponse br = AttackerBestResponse(
        LatentDistribution::FromUnnormalized(universe, rho_w, "restricted-rho"), config,
        guards);

    std::size_t j_star = 0;
    double upper = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      double v = 0.0;
      for (std::size_t r = 0; r < policies.size(); ++r) v += lp.row_strategy[r] * expected[r][j];
      if (v > upper) {
        upper = v;
        j_star = j;
      }
    }
    const double lower = br.value;
    const double gap = std::max(0.0, upper - lower);
    trace.push_back({it, static_cast<int>(policies.size()), static_cast<int>(cols.size()),
                     lp.value, lower, upper, gap});

    if (!best || gap < best->duality_gap) {
      GameSolution sol;
      sol.universe = universe;
      sol.policies = policies;
      sol.matrix = LossMatrix(universe);
      for (const auto& p : policies) sol.matrix.AddRow(p.id, p.losses);
      sol.mu = lp.row_strategy;
      sol.rho_weights = rho_w;
      sol.generator_weights = gen_w;
      sol.value = lp.value;
      sol.lower = lower;
      sol.upper = upper;
      sol.duality_gap = gap;
      best = std::move(sol);
    }
    best->iterations = it;
    best->trace = trace;
    if (gap <= gap_tol) return *best;

    bool grew = false;
    const bool known = std::any_of(policies.begin(), policies.end(),
                                   [&](const BestResponse& p) { return p.losses == br.losses; });
    if (!known) {
      add_policy(std::move(br));
      grew = true;
    }
    if (std::find(cols.begin(), cols.end(), j_star) == cols.end()) {
      cols.push_back(j_star);
      grew = true;
    }
    if (!grew) {
      throw NotConvergedError("double oracle stalled with gap " + FormatExact(gap), *best);
    }
  }
  throw NotConvergedError("double oracle hit max_iters with gap " +
                              FormatExact(best->duality_gap),
                          *best);
}

void WriteSolutionManifest(std::ostream& out, const GameSolution& s) {
  auto join = [](const std::vector<double>& v) {
    std::string t;
    for (std::size_t i = 0; i < v.size(); ++i) t += (i ? "," : "") + FormatExact(v[i]);
    return t;
  };
  out << "format = hiddenfleet-solution-v1\n";
  out << "board = " << s.universe->config().Key() << "\n";
  out << "layouts = " << s.universe->size() << "\n";
  out << "value = " << FormatExact(s.value) << "\n";
  out << "lower = " << FormatExact(s.lower) << "\n";
  out << "upper = " << FormatExact(s.upper) << "\n";
  out << "duality_gap = " << FormatExact(s.duality_gap) << "\n";
  out << "iterations = " << s.iterations << "\n";
  std::string ids;
  for (std::size_t r = 0; r < s.policies.size(); ++r) ids += (r ? "," : "") + s.policies[r].id;
  out << "policies = " << ids << "\n";
  out << "mu = " << join(s.mu) << "\n";
  out << "rho = " << join(s.rho_weights) << "\n";
  out << "generator_weights = " << join(s.generator_weights) << "\n";
  for (const auto& rec : s.trace) {
    out << "trace." << rec.iteration << " = " << rec.rows << "," << rec.cols << ","
        << FormatExact(rec.restricted_value) << "," << FormatExact(rec.lower) << ","
        << FormatExact(rec.upper) << "," << FormatExact(rec.gap) << "\n";
  }
}

void WriteIterationTraceCsv(std::ostream& out, std::span<const IterationRecord> trace) {
  out << "iteration,rows,cols,restricted_value,lower,upper,gap\n";
  for (const auto& r : trace) {
    out << r.iteration << ',' << r.rows << ',' << r.cols << ','
        << FormatFixed(r.restricted_value, 12) << ',' << FormatFixed(r.lower, 12) << ','
        << FormatFixed(r.upper, 12) << ',' << FormatFixed(r.gap, 12) << "\n";
  }
}

std::vector<ParetoPoint> ScalarizationSweep(const LatentDistribution& rho_d,
                                            const LatentDistribution& rho_u,
                                            std::span<const double> lambda_grid,
                                            const BoardConfig& config,
                                            const ExactGuards& guards) {
  Require(rho_d.is_explicit() && rho_u.is_explicit(), ErrorKind::kInvalidArgument,
          "sweep needs explicit distributions");
  std::vector<ParetoPoint> out;
  for (double lambda : lambda_grid) {
    Require(lambda > 0.0 && lambda < 1.0, ErrorKind::kInvalidArgument,
            "lambda must lie in (0, 1)");
    const auto nu = LatentDistribution::Mixture({rho_d, rho_u}, {lambda, 1.0 - lambda});
    const BestResponse br = AttackerBestResponse(nu, config, guards);
    ParetoPoint p;
    p.lambda = lambda;
    for (std::size_t z = 0; z < br.losses.size(); ++z) {
      p.nominal_loss += rho_u.weight(z) * br.losses[z];
      p.adversarial_loss += rho_d.weight(z) * br.losses[z];
    }
    p.policy_id = br.id;
    p.policy = br.table;
    out.push_back(std::move(p));
  }
  return out;
}

bool StrictlyDominates(double nominal_a, double adversarial_a, double nominal_b,
                       double adversarial_b, double tol) {
  return nominal_a < nominal_b - tol && adversarial_a < adversarial_b - tol;
}

std::vector<std::size_t> DominatedPoints(std::span<const ParetoPoint> points,
                                         std::span<const std::pair<double, double>> audit) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& b = points[i];
    bool dominated = false;
    for (const auto& a : points) {
      dominated |= StrictlyDominates(a.nominal_loss, a.adversarial_loss, b.nominal_loss,
                                     b.adversarial_loss);
    }
    for (const auto& [nom, adv] : audit) {
      dominated |= StrictlyDominates(nom, adv, b.nominal_loss, b.adversarial_loss);
    }
    if (dominated) out.push_back(i);
  }
  return out;
}

void WriteParetoCsv(std::ostream& out, std::span<const ParetoPoint> points) {
  out << "lambda,nominal_loss,adversarial_loss,policy\n";
  for (const auto& p : points) {
    out << FormatFixed(p.lambda, 6) << ',' << FormatFixed(p.nominal_loss, 12) << ','
        << FormatFixed(p.adversarial_loss, 12) << ',' << p.policy_id << "\n";
  }
}

}  // namespace hiddenfleet
