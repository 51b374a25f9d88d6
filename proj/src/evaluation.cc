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

#include "hiddenfleet/evaluation.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "hiddenfleet/error.h"
#include "hiddenfleet/format.h"

namespace hiddenfleet {

namespace {

std::vector<double> Sorted(std::span<const double> sample) {
  Require(!sample.empty(), ErrorKind::kInvalidArgument, "empty sample");
  std::vector<double> v(sample.begin(), sample.end());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

double EmpiricalP95(std::span<const double> sample) {
  const auto v = Sorted(sample);
  const std::size_t n = v.size();
  // Integer ceil(95 n / 100) avoids 0.95 * n rounding up by one ulp.
  const std::size_t k = (95 * n + 99) / 100;
  return v[k - 1];
}

double EmpiricalCvar10(std::span<const double> sample) {
  const auto v = Sorted(sample);
  const std::size_t n = v.size();
  const std::size_t k = (n + 9) / 10;
  double total = 0.0;
  for (std::size_t i = n - k; i < n; ++i) total += v[i];
  return total / static_cast<double>(k);
}

EvalReport SummarizeLengths(std::vector<int> lengths, std::string policy_id,
                            std::string distribution_id, std::uint64_t seed) {
  Require(!lengths.empty(), ErrorKind::kInvalidArgument, "no episodes to summarize");
  EvalReport r;
  r.n = static_cast<int>(lengths.size());
  std::vector<double> x(lengths.begin(), lengths.end());
  r.mean = std::accumulate(x.begin(), x.end(), 0.0) / r.n;
  if (r.n > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / (r.n - 1));
  }
  r.p95 = EmpiricalP95(x);
  r.cvar10 = EmpiricalCvar10(x);
  r.lengths = std::move(lengths);
  r.seed = seed;
  r.policy_id = std::move(policy_id);
  r.distribution_id = std::move(distribution_id);
  return r;
}

EvalReport Evaluate(const AttackerPolicy& policy, const LatentDistribution& dist, int n,
                    const BoardConfig& config, std::uint64_t master_seed, int workers) {
  Require(n >= 1, ErrorKind::kInvalidArgument, "evaluation needs n >= 1");
  workers = std::clamp(workers, 1, n);
  std::vector<int> lengths(n, 0);
  std::vector<char> truncated(n, 0);

  auto run_episode = [&](AttackerPolicy& p, int i) {
    const std::uint64_t s = DeriveSeed(master_seed, {static_cast<std::uint64_t>(i)});
    const Layout layout = dist.Sample(config, DeriveSeed(s, {1}));
    const EpisodeResult ep = Rollout(p, layout, config, DeriveSeed(s, {2}));
    lengths[i] = ep.truncated ? config.horizon() : ep.tau;
    truncated[i] = ep.truncated;
  };

  if (workers == 1) {
    auto p = policy.Clone();
    for (int i = 0; i < n; ++i) run_episode(*p, i);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        auto p = policy.Clone();
        for (int i = next++; i < n; i = next++) {
          try {
            run_episode(*p, i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mu);
            if (!failure) failure = std::current_exception();
            next = n;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  EvalReport r = SummarizeLengths(std::move(lengths), policy.id(), dist.id(), master_seed);
  r.truncated = static_cast<int>(std::count(truncated.begin(), truncated.end(), 1));
  return r;
}

double DiscountedReturn(int tau, double gamma) {
  Require(gamma > 0.0 && gamma < 1.0, ErrorKind::kGammaOutOfRange,
          "gamma must lie in (0, 1), got " + FormatExact(gamma));
  Require(tau >= 0, ErrorKind::kInvalidArgument, "tau must be >= 0");
  return -(1.0 - std::pow(gamma, tau)) / (1.0 - gamma);
}

bool UndiscountedIdentityCheck(const EpisodeResult& episode) {
  Require(!episode.truncated, ErrorKind::kInvalidArgument,
          "identity check needs a non-truncated episode");
  const auto rewards = StepRewards(episode);
  const long total = std::accumulate(rewards.begin(), rewards.end(), 0L);
  return total == -static_cast<long>(episode.tau);
}

GapReport RobustnessGaps(const EvalReport& nominal, const EvalReport& stress) {
  Require(nominal.policy_id == stress.policy_id, ErrorKind::kPolicyMismatch,
          "gap reports come from different policies: '" + nominal.policy_id + "' vs '" +
              stress.policy_id + "'");
  return {stress.mean - nominal.mean, stress.p95 - nominal.p95,
          stress.cvar10 - nominal.cvar10};
}

double HoeffdingRadius(std::span<const HoeffdingTerm> terms, double t_max, double delta) {
  Require(delta > 0.0 && delta < 1.0, ErrorKind::kBadDelta,
          "delta must lie in (0, 1), got " + FormatExact(delta));
  Require(!terms.empty(), ErrorKind::kInvalidArgument, "radius needs at least one term");
  Require(t_max > 0.0, ErrorKind::kInvalidArgument, "T_max must be positive");
  const double k = static_cast<double>(terms.size());
  const double log_term = std::log(2.0 * k / delta);
  double radius = 0.0;
  for (const auto& term : terms) {
    Require(term.n >= 1, ErrorKind::kInvalidArgument, "each term needs n >= 1");
    Require(term.weight > 0.0, ErrorKind::kInvalidArgument, "term weights must be positive");
    radius += term.weight * t_max * std::sqrt(log_term / (2.0 * term.n));
  }
  return radius;
}

CertificateReport CertifySign(double delta_hat, double radius, double delta_level) {
  CertificateReport r;
  r.delta_hat = delta_hat;
  r.radius = radius;
  r.delta_level = delta_level;
  r.sign_certified = std::abs(delta_hat) > radius;
  return r;
}

CertificateReport CertifyDifference(double delta_hat, std::vector<HoeffdingTerm> terms,
                                    double t_max, double delta_level) {
  CertificateReport r =
      CertifySign(delta_hat, HoeffdingRadius(terms, t_max, delta_level), delta_level);
  r.terms = std::move(terms);
  r.t_max = t_max;
  return r;
}

MarginalDemo MarginalInsufficiencyDemo() {
  using Z = std::pair<int, int>;
  const std::vector<Z> plus = {{0, 0}, {1, 1}};
  const std::vector<Z> minus = {{0, 1}, {1, 0}};
  // The attacker sees z1 and guesses z2 = z1; tau is 0 when right, 1 if not.
  auto tau_same = [](const Z& z) { return z.first == z.second ? 0 : 1; };
  auto loss = [&](const std::vector<Z>& support) {
    double total = 0.0;
    for (const Z& z : support) total += 0.5 * tau_same(z);
    return total;
  };
  auto marginals = [](const std::vector<Z>& support) {
    std::vector<double> m(2, 0.0);
    for (const Z& z : support) {
      m[0] += 0.5 * z.first;
      m[1] += 0.5 * z.second;
    }
    return m;
  };
  return {loss(plus), loss(minus), marginals(plus), marginals(minus)};
}

void WriteEvalReportCsv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "policy,distribution,seed,n,mean,std,p95,cvar10,truncated\n";
  for (const auto& r : reports) {
    out << r.policy_id << ',' << r.distribution_id << ',' << r.seed << ',' << r.n << ','
        << FormatFixed(r.mean) << ',' << FormatFixed(r.std) << ',' << FormatFixed(r.p95)
        << ',' << FormatFixed(r.cvar10) << ',' << r.truncated << "\n";
  }
}

void WriteLengthsCsv(std::ostream& out, const EvalReport& report) {
  out << "episode,tau\n";
  for (std::size_t i = 0; i < report.lengths.size(); ++i) {
    out << i << ',' << report.lengths[i] << "\n";
  }
}

void WriteGapCsv(std::ostream& out, const EvalReport& nominal, const EvalReport& stress,
                 const GapReport& gaps) {
  out << "policy,nominal,stress,mean_gap,p95_gap,cvar_gap\n";
  out << nominal.policy_id << ',' << nominal.distribution_id << ',' << stress.distribution_id
      << ',' << FormatFixed(gaps.mean_gap) << ',' << FormatFixed(gaps.p95_gap) << ','
      << FormatFixed(gaps.cvar_gap) << "\n";
}

}  // namespace hiddenfleet
