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

// Stage-1 attacker training and Stage-2 restricted iterative best response,
// with pluggable trainers.

#ifndef HIDDENFLEET_SELFPLAY_H_
#define HIDDENFLEET_SELFPLAY_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hiddenfleet/attackers.h"
#include "hiddenfleet/defenders.h"
#include "hiddenfleet/evaluation.h"
#include "hiddenfleet/exact_game.h"

namespace hiddenfleet {

class AttackerTrainer {
 public:
  virtual ~AttackerTrainer() = default;
  // `budget` is in trainer-defined units (see budget_unit()).
  virtual std::unique_ptr<AttackerPolicy> Improve(const AttackerPolicy& incumbent,
                                                  const LatentDistribution& dist,
                                                  std::int64_t budget,
                                                  std::uint64_t seed) = 0;
  virtual std::string id() const = 0;
  virtual std::string budget_unit() const = 0;
};

class DefenderTrainer {
 public:
  virtual ~DefenderTrainer() = default;
  virtual LatentDistribution Train(const AttackerPolicy& frozen, std::int64_t budget,
                                   std::uint64_t seed) = 0;
  virtual std::string id() const = 0;
};

// Returns the incumbent unchanged.
class IdentityAttackerTrainer : public AttackerTrainer {
 public:
  std::unique_ptr<AttackerPolicy> Improve(const AttackerPolicy& incumbent,
                                          const LatentDistribution&, std::int64_t,
                                          std::uint64_t) override {
    return incumbent.Clone();
  }
  std::string id() const override { return "identity"; }
  std::string budget_unit() const override { return "none"; }
};

struct ReferenceAttackerOptions {
  enum class Mode { kAuto, kExact, kHeuristic };
  Mode mode = Mode::kAuto;
  ExactGuards guards;
  std::int64_t enumeration_guard = kDefaultEnumerationGuard;
  ProbMapOptions probmap;
  ParticleOptions particle;
  int workers = 1;
};

// Exact mode: the DP best response to `dist` (the incumbent is ignored).
// Heuristic mode: the best of {incumbent, probmap, particle} by mean tau over
// `budget` common-random-number episodes on `dist`; ties keep the incumbent,
// budget 0 returns it unchanged. Auto picks exact whenever the guards allow.
class ReferenceAttackerTrainer : public AttackerTrainer {
 public:
  ReferenceAttackerTrainer(BoardConfig config, ReferenceAttackerOptions options = {});

  std::unique_ptr<AttackerPolicy> Improve(const AttackerPolicy& incumbent,
                                          const LatentDistribution& dist,
                                          std::int64_t budget, std::uint64_t seed) override;
  std::string id() const override;
  std::string budget_unit() const override { return "evaluation episodes per candidate"; }

  // True when the last Improve() ran the exact DP.
  bool last_exact() const { return last_exact_; }

 private:
  std::optional<LatentDistribution> ExactTarget(const LatentDistribution& dist) const;

  BoardConfig config_;
  ReferenceAttackerOptions options_;
  bool last_exact_ = false;
};

// Always returns the same distribution (e.g. rho_U).
class FixedDefenderTrainer : public DefenderTrainer {
 public:
  explicit FixedDefenderTrainer(LatentDistribution dist) : dist_(std::move(dist)) {}
  LatentDistribution Train(const AttackerPolicy&, std::int64_t, std::uint64_t) override {
    return dist_;
  }
  std::string id() const override { return "fixed:" + dist_.id(); }

 private:
  LatentDistribution dist_;
};

// Exact extreme-point best response over a polytope. For stochastic attackers
// the budget is the number of episodes per layout (at least 1).
class PolytopeDefenderTrainer : public DefenderTrainer {
 public:
  explicit PolytopeDefenderTrainer(DefenderPolytope polytope)
      : polytope_(std::move(polytope)) {}
  LatentDistribution Train(const AttackerPolicy& frozen, std::int64_t budget,
                           std::uint64_t seed) override;
  std::string id() const override { return "polytope-br"; }
  const DefenderPolytope& polytope() const { return polytope_; }

 private:
  DefenderPolytope polytope_;
};

struct FamilyBox {
  std::vector<Family> families = {Family::kUniform, Family::kEdge, Family::kCluster,
                                  Family::kSpread, Family::kParity};
  double min_strength = 0.0;
  double max_strength = 8.0;
  double initial_step = 1.0;
};

struct FamilySearchStep {
  FamilySpec spec;
  double estimate = 0.0;
  bool accepted = false;
};

// Hill-climb over scored families. Every family is first scored at its
// default strength, then the incumbent's strength moves by +-step (halving
// the step when neither side improves). One unit of budget is one Monte
// Carlo evaluation of `eval_episodes` episodes; all evaluations share the
// same seed, so the best-so-far value never decreases with the budget.
// epsilon_D is not controlled.
class FamilyDefenderTrainer : public DefenderTrainer {
 public:
  FamilyDefenderTrainer(BoardConfig config, FamilyBox box, int eval_episodes = 100,
                        int workers = 1);
  LatentDistribution Train(const AttackerPolicy& frozen, std::int64_t budget,
                           std::uint64_t seed) override;
  std::string id() const override { return "family-hillclimb"; }

  // Search record of the last Train() call.
  const std::vector<FamilySearchStep>& history() const { return history_; }
  double best_estimate() const { return best_estimate_; }

 private:
  BoardConfig config_;
  FamilyBox box_;
  int eval_episodes_;
  int workers_;
  std::vector<FamilySearchStep> history_;
  double best_estimate_ = 0.0;
};

enum class Stage1Regime { kA, kB, kC };
std::string_view RegimeName(Stage1Regime regime);
Stage1Regime ParseRegime(std::string_view text);

struct Stage1Config {
  BoardConfig board;
  Stage1Regime regime = Stage1Regime::kA;
  int generations = 3;
  // N_g; a single entry applies to every generation.
  std::vector<std::int64_t> budgets = {100};
  // Generations g+1 after which the evaluation runs.
  std::vector<int> eval_generations;
  int eval_episodes = 100;
  // Regime C: b(g) = schedule[g mod size]; 0 is rho_U, 1 is rho_stress.
  std::vector<int> schedule = {0, 1};
  std::uint64_t seed = 0;
  int workers = 1;
};

struct Stage1TraceRow {
  int generation = 0;
  double j_uniform = 0.0;
  double j_stress = 0.0;
};

struct Stage1Result {
  std::unique_ptr<AttackerPolicy> policy;
  std::vector<Stage1TraceRow> trace;
  // Distribution id handed to the trainer at each generation.
  std::vector<std::string> training_ids;
};

// Algorithm 1. Evaluations always use the same two seed streams, so an
// unchanged policy yields identical trace rows.
Stage1Result RunStage1(const Stage1Config& cfg, const AttackerPolicy& initial,
                       AttackerTrainer& trainer, const LatentDistribution& uniform,
                       const LatentDistribution& stress,
                       const std::optional<LatentDistribution>& mixture = std::nullopt);

// "generation,J_U,J_S".
void WriteStage1TraceCsv(std::ostream& out, std::span<const Stage1TraceRow> trace);

struct Stage2Config {
  BoardConfig board;
  int generations = 3;
  double lambda = 0.5;
  std::int64_t defender_budget = 1;
  std::int64_t attacker_budget = 100;
  int n_scripted = 100;
  int n_pre_defender = 50;
  int n_post_defender = 100;
  double delta = 0.05;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct GenerationLog {
  std::uint64_t seed = 0;
  int k = 0;
  double j_u_pre = 0.0;
  double j_d_pre = 0.0;
  double j_u_post = 0.0;
  double j_d_post = 0.0;
  double j_s_post = 0.0;
  double defender_adversarial_hat = 0.0;
  double attacker_adaptation_hat = 0.0;
  double uniform_drift_hat = 0.0;
  double weighted_residual_hat = 0.0;
  CertificateReport defender_certificate;
  CertificateReport residual_certificate;
  std::string rho_k_id;
  std::string attacker_prev_id;
  std::string attacker_id;
  // Exact values by enumeration; set when both attackers are deterministic
  // and rho_k, rho_U are explicit over one universe.
  bool has_population = false;
  double pop_defender_adversarial = 0.0;
  double pop_attacker_adaptation = 0.0;
  double pop_uniform_drift = 0.0;
  double pop_weighted_residual = 0.0;
};

struct Stage2Result {
  std::vector<GenerationLog> logs;
  std::vector<LatentDistribution> defenders;
  std::unique_ptr<AttackerPolicy> final_attacker;
};

// Algorithm 2. Generation k draws every seed from DeriveSeed(cfg.seed, {k}):
// {1} defender training, {2} attacker training, {10..14} the five estimates
// (independent streams).
Stage2Result RunStage2(const Stage2Config& cfg, const AttackerPolicy& initial,
                       AttackerTrainer& attacker_trainer, DefenderTrainer& defender_trainer,
                       const LatentDistribution& uniform, const LatentDistribution& stress);

// Columns: seed,k,A_k_on_UNIFORM,A_k_on_stress,A_k_on_D_k,defender_adversarial,
// attacker_adaptation,uniform_drift,weighted_residual,J_U_pre,J_D_pre,
// radius_defender,certified_defender,radius_residual,certified_residual,rho_k,
// pop_defender_adversarial,pop_weighted_residual (empty when unavailable).
void WriteGenerationLogCsv(std::ostream& out, std::span<const GenerationLog> logs);

}  // namespace hiddenfleet

#endif  // HIDDENFLEET_SELFPLAY_H_
