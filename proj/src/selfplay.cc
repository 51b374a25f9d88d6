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

#include "hiddenfleet/selfplay.h"

#include <algorithm>
#include <cmath>

#include "hiddenfleet/error.h"
#include "hiddenfleet/format.h"

namespace hiddenfleet {

namespace {

// Re-raises a module error with the generation that failed.
template <typename F>
auto WithContext(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const NotConvergedError&) {
    throw;
  } catch (const Error& e) {
    throw Error(e.kind(), where + ": " + e.what());
  }
}

}  // namespace

ReferenceAttackerTrainer::ReferenceAttackerTrainer(BoardConfig config,
                                                   ReferenceAttackerOptions options)
    : config_(std::move(config)), options_(std::move(options)) {}

std::string ReferenceAttackerTrainer::id() const {
  switch (options_.mode) {
    case ReferenceAttackerOptions::Mode::kExact: return "reference-attacker:exact";
    case ReferenceAttackerOptions::Mode::kHeuristic: return "reference-attacker:heuristic";
    case ReferenceAttackerOptions::Mode::kAuto: break;
  }
  return "reference-attacker:auto";
}

std::optional<LatentDistribution> ReferenceAttackerTrainer::ExactTarget(
    const LatentDistribution& dist) const {
  if (config_.num_cells() > options_.guards.max_cells) return std::nullopt;
  auto explicit_dist = dist.Materialize(config_, options_.enumeration_guard);
  if (!explicit_dist ||
      static_cast<std::int64_t>(explicit_dist->universe().size()) > options_.guards.max_layouts) {
    return std::nullopt;
  }
  return explicit_dist;
}

std::unique_ptr<AttackerPolicy> ReferenceAttackerTrainer::Improve(
    const AttackerPolicy& incumbent, const LatentDistribution& dist, std::int64_t budget,
    std::uint64_t seed) {
  using Mode = ReferenceAttackerOptions::Mode;
  last_exact_ = false;
  if (options_.mode != Mode::kHeuristic) {
    auto target = ExactTarget(dist);
    if (target) {
      last_exact_ = true;
      return AttackerBestResponse(*target, config_, options_.guards).MakePolicy();
    }
    Require(options_.mode != Mode::kExact, ErrorKind::kGuardExceeded,
            "exact attacker training is outside the DP guards; use heuristic mode");
  }
  if (budget <= 0) return incumbent.Clone();

  std::vector<std::unique_ptr<AttackerPolicy>> candidates;
  candidates.push_back(incumbent.Clone());
  candidates.push_back(std::make_unique<ProbMapPolicy>(config_, options_.probmap));
  candidates.push_back(std::make_unique<ParticlePolicy>(config_, options_.particle));
  std::size_t best = 0;
  double best_mean = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double mean = Evaluate(*candidates[i], dist, static_cast<int>(budget), config_,
                                 seed, options_.workers)
                            .mean;
    if (i == 0 || mean < best_mean) {
      best = i;
      best_mean = mean;
    }
  }
  return std::move(candidates[best]);
}

LatentDistribution PolytopeDefenderTrainer::Train(const AttackerPolicy& frozen,
                                                  std::int64_t budget, std::uint64_t seed) {
  auto policy = frozen.Clone();
  const int episodes = static_cast<int>(std::max<std::int64_t>(1, budget));
  return DefenderBestResponse(*policy, polytope_, episodes, seed).rho;
}

FamilyDefenderTrainer::FamilyDefenderTrainer(BoardConfig config, FamilyBox box,
                                             int eval_episodes, int workers)
    : config_(std::move(config)),
      box_(std::move(box)),
      eval_episodes_(eval_episodes),
      workers_(workers) {
  Require(!box_.families.empty(), ErrorKind::kInvalidArgument, "family box is empty");
  Require(box_.min_strength <= box_.max_strength && box_.initial_step > 0.0,
          ErrorKind::kInvalidArgument, "malformed family box");
  Require(eval_episodes_ >= 1, ErrorKind::kInvalidArgument, "eval_episodes must be >= 1");
}

LatentDistribution FamilyDefenderTrainer::Train(const AttackerPolicy& frozen,
                                                std::int64_t budget, std::uint64_t seed) {
  history_.clear();
  auto make = [&](const FamilySpec& spec) {
    auto d = LatentDistribution::Scored(config_, spec);
    auto m = d.Materialize(config_);
    return m ? *m : d;
  };
  auto clamp = [&](double s) { return std::clamp(s, box_.min_strength, box_.max_strength); };
  auto evaluate = [&](const FamilySpec& spec) {
    return Evaluate(frozen, make(spec), eval_episodes_, config_, seed, workers_).mean;
  };

  FamilySpec best{box_.families.front(), clamp(DefaultStrength(box_.families.front()))};
  if (best.family == Family::kUniform) best.strength = 0.0;
  best_estimate_ = -1.0;
  std::int64_t used = 0;

  for (Family f : box_.families) {
    if (used >= budget) break;
    FamilySpec spec{f, f == Family::kUniform ? 0.0 : clamp(DefaultStrength(f))};
    const double v = evaluate(spec);
    ++used;
    const bool accepted = v > best_estimate_;
    history_.push_back({spec, v, accepted});
    if (accepted) {
      best = spec;
      best_estimate_ = v;
    }
  }

  double step = box_.initial_step;
  while (used < budget && best.family != Family::kUniform && step > 1e-3) {
    bool improved = false;
    for (double dir : {+1.0, -1.0}) {
      if (used >= budget) break;
      FamilySpec spec{best.family, clamp(best.strength + dir * step)};
      if (spec.strength == best.strength) continue;
      const double v = evaluate(spec);
      ++used;
      const bool accepted = v > best_estimate_;
      history_.push_back({spec, v, accepted});
      if (accepted) {
        best = spec;
        best_estimate_ = v;
        improved = true;
        break;
      }
    }
    if (!improved) step /= 2.0;
  }
  return make(best);
}

std::string_view RegimeName(Stage1Regime regime) {
  switch (regime) {
    case Stage1Regime::kA: return "A";
    case Stage1Regime::kB: return "B";
    case Stage1Regime::kC: return "C";
  }
  return "?";
}

Stage1Regime ParseRegime(std::string_view text) {
  if (text == "A") return Stage1Regime::kA;
  if (text == "B") return Stage1Regime::kB;
  if (text == "C") return Stage1Regime::kC;
  Fail(ErrorKind::kInvalidArgument, "unknown stage-1 regime '" + std::string(text) + "'");
}

Stage1Result RunStage1(const Stage1Config& cfg, const AttackerPolicy& initial,
                       AttackerTrainer& trainer, const LatentDistribution& uniform,
                       const LatentDistribution& stress,
                       const std::optional<LatentDistribution>& mixture) {
  Require(cfg.generations >= 1, ErrorKind::kInvalidArgument, "generations must be >= 1");
  Require(cfg.budgets.size() == 1 || static_cast<int>(cfg.budgets.size()) == cfg.generations,
          ErrorKind::kInvalidArgument, "budgets need one entry or one per generation");
  Require(cfg.eval_episodes >= 1, ErrorKind::kInvalidArgument, "eval_episodes must be >= 1");
  if (cfg.regime == Stage1Regime::kB) {
    Require(mixture.has_value(), ErrorKind::kInvalidArgument, "regime B needs a mixture");
  }
  if (cfg.regime == Stage1Regime::kC) {
    const auto& s = cfg.schedule;
    Require(!s.empty() && std::all_of(s.begin(), s.end(), [](int b) { return b == 0 || b == 1; }),
            ErrorKind::kInvalidArgument, "regime C schedule entries must be 0 (uniform) or 1 (stress)");
    Require(std::count(s.begin(), s.end(), 0) > 0 && std::count(s.begin(), s.end(), 1) > 0,
            ErrorKind::kInvalidArgument, "regime C schedule must use both uniform and stress");
  }

  const std::uint64_t eval_u = DeriveSeed(cfg.seed, {0xe0, 0});
  const std::uint64_t eval_s = DeriveSeed(cfg.seed, {0xe0, 1});
  Stage1Result result;
  result.policy = initial.Clone();
  for (int g = 0; g < cfg.generations; ++g) {
    const LatentDistribution* train = &uniform;
    if (cfg.regime == Stage1Regime::kB) train = &*mixture;
    if (cfg.regime == Stage1Regime::kC) {
      train = cfg.schedule[g % cfg.schedule.size()] == 0 ? &uniform : &stress;
    }
    result.training_ids.push_back(train->id());
    const std::int64_t budget = cfg.budgets.size() == 1 ? cfg.budgets[0] : cfg.budgets[g];
    result.policy = WithContext("stage-1 generation " + std::to_string(g), [&] {
      return trainer.Improve(*result.policy, *train, budget,
                             DeriveSeed(cfg.seed, {static_cast<std::uint64_t>(g), 1}));
    });
    if (std::find(cfg.eval_generations.begin(), cfg.eval_generations.end(), g + 1) !=
        cfg.eval_generations.end()) {
      Stage1TraceRow row;
      row.generation = g + 1;
      row.j_uniform =
          Evaluate(*result.policy, uniform, cfg.eval_episodes, cfg.board, eval_u, cfg.workers).mean;
      row.j_stress =
          Evaluate(*result.policy, stress, cfg.eval_episodes, cfg.board, eval_s, cfg.workers).mean;
      result.trace.push_back(row);
    }
  }
  return result;
}

void WriteStage1TraceCsv(std::ostream& out, std::span<const Stage1TraceRow> trace) {
  out << "generation,J_U,J_S\n";
  for (const auto& r : trace) {
    out << r.generation << ',' << FormatFixed(r.j_uniform) << ',' << FormatFixed(r.j_stress)
        << "\n";
  }
}

Stage2Result RunStage2(const Stage2Config& cfg, const AttackerPolicy& initial,
                       AttackerTrainer& attacker_trainer, DefenderTrainer& defender_trainer,
                       const LatentDistribution& uniform, const LatentDistribution& stress) {
  Require(cfg.generations >= 1, ErrorKind::kInvalidArgument, "generations must be >= 1");
  Require(cfg.lambda > 0.0 && cfg.lambda < 1.0, ErrorKind::kInvalidArgument,
          "lambda must lie in (0, 1)");
  Require(cfg.n_scripted >= 1 && cfg.n_pre_defender >= 1 && cfg.n_post_defender >= 1,
          ErrorKind::kInvalidArgument, "evaluation counts must be >= 1");
  const double t_max = cfg.board.horizon();
  const double lambda = cfg.lambda;

  auto uniform_exact = uniform.Materialize(cfg.board);
  Stage2Result result;
  std::unique_ptr<AttackerPolicy> prev = initial.Clone();
  for (int k = 1; k <= cfg.generations; ++k) {
    const std::string where = "stage-2 generation " + std::to_string(k);
    const std::uint64_t gk = DeriveSeed(cfg.seed, {static_cast<std::uint64_t>(k)});

    LatentDistribution rho_k = WithContext(
        where, [&] { return defender_trainer.Train(*prev, cfg.defender_budget, DeriveSeed(gk, {1})); });
    auto rho_k_exact = rho_k.Materialize(cfg.board);
    LatentDistribution nu_k =
        (rho_k_exact && uniform_exact)
            ? LatentDistribution::Mixture({*rho_k_exact, *uniform_exact}, {lambda, 1.0 - lambda})
            : LatentDistribution::Mixture({rho_k, uniform}, {lambda, 1.0 - lambda});
    std::unique_ptr<AttackerPolicy> next = WithContext(where, [&] {
      return attacker_trainer.Improve(*prev, nu_k, cfg.attacker_budget, DeriveSeed(gk, {2}));
    });

    auto estimate = [&](const AttackerPolicy& p, const LatentDistribution& d, int n,
                        std::uint64_t stream) {
      return WithContext(where, [&] {
        return Evaluate(p, d, n, cfg.board, DeriveSeed(gk, {stream}), cfg.workers).mean;
      });
    };
    GenerationLog log;
    log.seed = cfg.seed;
    log.k = k;
    log.j_u_pre = estimate(*prev, uniform, cfg.n_scripted, 10);
    log.j_d_pre = estimate(*prev, rho_k, cfg.n_pre_defender, 11);
    log.j_u_post = estimate(*next, uniform, cfg.n_scripted, 12);
    log.j_d_post = estimate(*next, rho_k, cfg.n_post_defender, 13);
    log.j_s_post = estimate(*next, stress, cfg.n_scripted, 14);
    log.defender_adversarial_hat = log.j_d_pre - log.j_u_pre;
    log.attacker_adaptation_hat = log.j_d_post - log.j_d_pre;
    log.uniform_drift_hat = log.j_u_post - log.j_u_pre;
    log.weighted_residual_hat =
        lambda * log.attacker_adaptation_hat + (1.0 - lambda) * log.uniform_drift_hat;

    const std::vector<HoeffdingTerm> defender_terms = {{cfg.n_pre_defender, 1.0},
                                                       {cfg.n_scripted, 1.0}};
    const std::vector<HoeffdingTerm> residual_terms = {{cfg.n_post_defender, lambda},
                                                       {cfg.n_pre_defender, lambda},
                                                       {cfg.n_scripted, 1.0 - lambda},
                                                       {cfg.n_scripted, 1.0 - lambda}};
    log.defender_certificate =
        CertifyDifference(log.defender_adversarial_hat, defender_terms, t_max, cfg.delta);
    log.residual_certificate =
        CertifyDifference(log.weighted_residual_hat, residual_terms, t_max, cfg.delta);
    log.rho_k_id = rho_k.id();
    log.attacker_prev_id = prev->id();
    log.attacker_id = next->id();

    if (rho_k_exact && uniform_exact && prev->deterministic() && next->deterministic() &&
        rho_k_exact->universe_ptr() == uniform_exact->universe_ptr()) {
      const LayoutSet& u = uniform_exact->universe();
      const auto before = PolicyLosses(*prev, u);
      const auto after = PolicyLosses(*next, u);
      auto expect = [&](const LatentDistribution& d, const std::vector<int>& l) {
        double v = 0.0;
        for (std::size_t z = 0; z < l.size(); ++z) v += d.weight(z) * l[z];
        return v;
      };
      log.has_population = true;
      log.pop_defender_adversarial = expect(*rho_k_exact, before) - expect(*uniform_exact, before);
      log.pop_attacker_adaptation = expect(*rho_k_exact, after) - expect(*rho_k_exact, before);
      log.pop_uniform_drift = expect(*uniform_exact, after) - expect(*uniform_exact, before);
      log.pop_weighted_residual =
          lambda * log.pop_attacker_adaptation + (1.0 - lambda) * log.pop_uniform_drift;
    }

    result.logs.push_back(std::move(log));
    result.defenders.push_back(rho_k);
    prev = std::move(next);
  }
  result.final_attacker = std::move(prev);
  return result;
}

void WriteGenerationLogCsv(std::ostream& out, std::span<const GenerationLog> logs) {
  out << "seed,k,A_k_on_UNIFORM,A_k_on_stress,A_k_on_D_k,defender_adversarial,"
         "attacker_adaptation,uniform_drift,weighted_residual,J_U_pre,J_D_pre,"
         "radius_defender,certified_defender,radius_residual,certified_residual,rho_k,"
         "pop_defender_adversarial,pop_weighted_residual\n";
  auto f = [](double x) { return FormatFixed(x, 10); };
  for (const auto& g : logs) {
    out << g.seed << ',' << g.k << ',' << f(g.j_u_post) << ',' << f(g.j_s_post) << ','
        << f(g.j_d_post) << ',' << f(g.defender_adversarial_hat) << ','
        << f(g.attacker_adaptation_hat) << ',' << f(g.uniform_drift_hat) << ','
        << f(g.weighted_residual_hat) << ',' << f(g.j_u_pre) << ',' << f(g.j_d_pre) << ','
        << f(g.defender_certificate.radius) << ','
        << (g.defender_certificate.sign_certified ? 1 : 0) << ','
        << f(g.residual_certificate.radius) << ','
        << (g.residual_certificate.sign_certified ? 1 : 0) << ',' << g.rho_k_id << ',';
    if (g.has_population) {
      out << f(g.pop_defender_adversarial) << ',' << f(g.pop_weighted_residual);
    } else {
      out << ',';
    }
    out << "\n";
  }
}

}  // namespace hiddenfleet
