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

// Exact latent minimax on small boards: loss matrices, best responses for
// both players, double oracle and the nominal/adversarial Pareto sweep.

#ifndef HIDDENFLEET_EXACT_GAME_H_
#define HIDDENFLEET_EXACT_GAME_H_

#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hiddenfleet/attackers.h"
#include "hiddenfleet/board.h"
#include "hiddenfleet/defenders.h"
#include "hiddenfleet/error.h"

namespace hiddenfleet {

struct ExactGuards {
  int max_cells = 16;
  std::int64_t max_layouts = 5000;
};

// Rows are deterministic attacker policies, columns the layouts of one
// universe, entries tau (exact: the environment is deterministic given z).
class LossMatrix {
 public:
  LossMatrix() = default;
  explicit LossMatrix(std::shared_ptr<const LayoutSet> universe)
      : universe_(std::move(universe)) {}

  // Throws kDimensionMismatch when the row length differs from the universe.
  void AddRow(std::string id, std::vector<int> losses);

  std::size_t rows() const { return entries_.size(); }
  std::size_t cols() const { return universe_ ? universe_->size() : 0; }
  int at(std::size_t row, std::size_t col) const { return entries_[row][col]; }
  const std::vector<int>& row(std::size_t r) const { return entries_[r]; }
  const std::string& row_id(std::size_t r) const { return ids_[r]; }
  const LayoutSet& universe() const { return *universe_; }
  std::shared_ptr<const LayoutSet> universe_ptr() const { return universe_; }

  // Header "policy,z0,z1,...".
  void WriteCsv(std::ostream& out) const;

 private:
  std::shared_ptr<const LayoutSet> universe_;
  std::vector<std::string> ids_;
  std::vector<std::vector<int>> entries_;
};

// tau of a deterministic policy on every layout. Throws kInvalidArgument for
// stochastic policies.
std::vector<int> PolicyLosses(AttackerPolicy& policy, const LayoutSet& universe);

// Mean tau per layout over `episodes_per_layout` seeded episodes (one is
// enough for deterministic policies).
std::vector<double> ExpectedLossPerLayout(AttackerPolicy& policy,
                                          const LayoutSet& universe,
                                          int episodes_per_layout = 1,
                                          std::uint64_t seed = 0);

LossMatrix BuildLossMatrix(std::span<AttackerPolicy* const> policies,
                           std::shared_ptr<const LayoutSet> universe);

// V(mu, rho) = sum_r sum_z mu_r rho_z L(r, z). Throws kDimensionMismatch.
double ValueBilinear(std::span<const double> mu, const LatentDistribution& rho,
                     const LossMatrix& matrix);

// E_rho[tau] for an explicit rho, by exhaustive rollout over its universe.
double ExpectedLoss(AttackerPolicy& policy, const LatentDistribution& rho,
                    int episodes_per_layout = 1, std::uint64_t seed = 0);

struct BestResponse {
  std::shared_ptr<const DeterministicPolicyTable> table;
  std::string id;
  double value = 0.0;
  // tau on every universe layout, including zero-weight ones.
  std::vector<int> losses;

  std::unique_ptr<AttackerPolicy> MakePolicy() const {
    return std::make_unique<TablePolicy>(table, id);
  }
};

// Exactly optimal deterministic policy against an explicit rho, by
// expectimax over information states. Among optimal actions the DP prefers
// the larger posterior hit probability, then the cheaper play on
// zero-weight layouts, then the lowest cell, so the table is total on every
// layout of the universe. Throws kGuardExceeded beyond the guards.
BestResponse AttackerBestResponse(const LatentDistribution& rho,
                                  const BoardConfig& config,
                                  const ExactGuards& guards = {});

struct DefenderResponse {
  std::size_t generator = 0;
  LatentDistribution rho;
  double value = 0.0;
};

// Maximizing extreme point (first on ties) for a per-layout loss vector.
DefenderResponse DefenderBestResponse(std::span<const double> per_layout_loss,
                                      const DefenderPolytope& polytope);
DefenderResponse DefenderBestResponse(std::span<const double> mu,
                                      const LossMatrix& matrix,
                                      const DefenderPolytope& polytope);
DefenderResponse DefenderBestResponse(AttackerPolicy& policy,
                                      const DefenderPolytope& polytope,
                                      int episodes_per_layout = 1,
                                      std::uint64_t seed = 0);

struct IterationRecord {
  int iteration = 0;
  int rows = 0;
  int cols = 0;
  double restricted_value = 0.0;
  // min over all attackers against the restricted defender equilibrium.
  double lower = 0.0;
  // max over the polytope against the restricted attacker equilibrium.
  double upper = 0.0;
  double gap = 0.0;
};

struct GameSolution {
  std::shared_ptr<const LayoutSet> universe;
  std::vector<BestResponse> policies;
  LossMatrix matrix;
  std::vector<double> mu;
  std::vector<double> rho_weights;
  // Weights over PolytopeExtremePoints(polytope).
  std::vector<double> generator_weights;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> trace;

  LatentDistribution rho() const;
};

class NotConvergedError : public Error {
 public:
  NotConvergedError(const std::string& message, GameSolution best)
      : Error(ErrorKind::kNotConverged, message), best_(std::move(best)) {}
  const GameSolution& best() const { return best_; }

 private:
  GameSolution best_;
};

// Double oracle over deterministic attackers and the polytope's extreme
// points; restricted games are solved by LP. Stops when upper - lower <=
// gap_tol. Throws NotConvergedError (carrying the smallest-gap iterate) after
// max_iters or when neither oracle adds a new strategy.
GameSolution DoubleOracleSolve(const BoardConfig& config,
                               const DefenderPolytope& polytope, double gap_tol,
                               int max_iters, const ExactGuards& guards = {});

// Key-value manifest ("key = value" lines) of a solution.
void WriteSolutionManifest(std::ostream& out, const GameSolution& solution);
// "iteration,rows,cols,restricted_value,lower,upper,gap".
void WriteIterationTraceCsv(std::ostream& out, std::span<const IterationRecord> trace);

struct ParetoPoint {
  double lambda = 0.0;
  double nominal_loss = 0.0;
  double adversarial_loss = 0.0;
  std::string policy_id;
  std::shared_ptr<const DeterministicPolicyTable> policy;
};

// One exact minimizer of lambda*E_D[tau] + (1-lambda)*E_U[tau] per lambda in
// (0, 1).
std::vector<ParetoPoint> ScalarizationSweep(const LatentDistribution& rho_d,
                                            const LatentDistribution& rho_u,
                                            std::span<const double> lambda_grid,
                                            const BoardConfig& config,
                                            const ExactGuards& guards = {});

// Strictly better on both objectives.
bool StrictlyDominates(double nominal_a, double adversarial_a, double nominal_b,
                       double adversarial_b, double tol = 1e-12);

// Indices of sweep points strictly dominated by another sweep point or by any
// (nominal, adversarial) audit pair.
std::vector<std::size_t> DominatedPoints(
    std::span<const ParetoPoint> points,
    std::span<const std::pair<double, double>> audit = {});

// "lambda,nominal_loss,adversarial_loss,policy".
void WriteParetoCsv(std::ostream& out, std::span<const ParetoPoint> points);

}  // namespace hiddenfleet

#endif  // HIDDENFLEET_EXACT_GAME_H_
