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

// Episode statistics, robustness gaps and Hoeffding sign certificates.

#ifndef HIDDENFLEET_EVALUATION_H_
#define HIDDENFLEET_EVALUATION_H_

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hiddenfleet/board.h"
#include "hiddenfleet/defenders.h"
#include "hiddenfleet/policy.h"

namespace hiddenfleet {

// Lowest sample value whose empirical CDF reaches 0.95, i.e. the
// ceil(0.95 n)-th order statistic.
double EmpiricalP95(std::span<const double> sample);
// Mean of the top ceil(0.10 n) order statistics.
double EmpiricalCvar10(std::span<const double> sample);

struct EvalReport {
  int n = 0;
  double mean = 0.0;
  // Sample standard deviation (n - 1 denominator; 0 when n = 1).
  double std = 0.0;
  double p95 = 0.0;
  double cvar10 = 0.0;
  // Truncated episodes enter as T_max.
  std::vector<int> lengths;
  int truncated = 0;
  std::uint64_t seed = 0;
  std::string distribution_id;
  std::string policy_id;
};

// Summary statistics of directly supplied lengths.
EvalReport SummarizeLengths(std::vector<int> lengths, std::string policy_id = "",
                            std::string distribution_id = "", std::uint64_t seed = 0);

// n episodes. Episode i uses s_i = DeriveSeed(master_seed, {i}); the layout
// is drawn with DeriveSeed(s_i, {1}) and the policy is reset with
// DeriveSeed(s_i, {2}), so the first n lengths do not depend on the total n
// or on `workers`.
EvalReport Evaluate(const AttackerPolicy& policy, const LatentDistribution& dist, int n,
                    const BoardConfig& config, std::uint64_t master_seed, int workers = 1);

// Per-trajectory discounted surrogate -(1 - gamma^tau) / (1 - gamma).
// Throws kGammaOutOfRange unless 0 < gamma < 1.
double DiscountedReturn(int tau, double gamma);

// Sum of the per-step rewards equals -tau. Throws kInvalidArgument for a
// truncated episode.
bool UndiscountedIdentityCheck(const EpisodeResult& episode);

struct GapReport {
  double mean_gap = 0.0;
  double p95_gap = 0.0;
  double cvar_gap = 0.0;
};

// stress - nominal, componentwise. Throws kPolicyMismatch.
GapReport RobustnessGaps(const EvalReport& nominal, const EvalReport& stress);

struct HoeffdingTerm {
  int n = 1;
  double weight = 1.0;
};

// sum_i w_i T_max sqrt(log(2k/delta) / (2 n_i)) over k terms. Throws
// kBadDelta unless 0 < delta < 1.
double HoeffdingRadius(std::span<const HoeffdingTerm> terms, double t_max, double delta);

struct CertificateReport {
  double delta_hat = 0.0;
  double radius = 0.0;
  bool sign_certified = false;
  double delta_level = 0.05;
  std::vector<HoeffdingTerm> terms;
  double t_max = 0.0;
};

CertificateReport CertifySign(double delta_hat, double radius, double delta_level);
// Radius from the terms, then CertifySign.
CertificateReport CertifyDifference(double delta_hat, std::vector<HoeffdingTerm> terms,
                                    double t_max, double delta_level);

// The two-coordinate construction with rho+ on {(0,0),(1,1)} and rho- on
// {(0,1),(1,0)} against the attacker that guesses z2 = z1.
struct MarginalDemo {
  double loss_plus = 0.0;
  double loss_minus = 0.0;
  std::vector<double> marginals_plus;
  std::vector<double> marginals_minus;
};
MarginalDemo MarginalInsufficiencyDemo();

// "policy,distribution,seed,n,mean,std,p95,cvar10,truncated".
void WriteEvalReportCsv(std::ostream& out, std::span<const EvalReport> reports);
// "episode,tau".
void WriteLengthsCsv(std::ostream& out, const EvalReport& report);
// "policy,nominal,stress,mean_gap,p95_gap,cvar_gap".
void WriteGapCsv(std::ostream& out, const EvalReport& nominal, const EvalReport& stress,
                 const GapReport& gaps);

}  // namespace hiddenfleet

#endif  // HIDDENFLEET_EVALUATION_H_
