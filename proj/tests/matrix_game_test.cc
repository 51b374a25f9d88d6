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


#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "hiddenfleet/error.h"
#include "hiddenfleet/matrix_game.h"

namespace hiddenfleet {
namespace {

using Matrix = std::vector<std::vector<double>>;

// Row player minimizes. Worst case of a row mix and best case of a column mix.
double RowGuarantee(const Matrix& m, const std::vector<double>& x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m[0].size(); ++j) {
    double v = 0;
    for (std::size_t i = 0; i < m.size(); ++i) v += x[i] * m[i][j];
    worst = std::max(worst, v);
  }
  return worst;
}

double ColGuarantee(const Matrix& m, const std::vector<double>& y) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.size(); ++i) {
    double v = 0;
    for (std::size_t j = 0; j < m[0].size(); ++j) v += y[j] * m[i][j];
    best = std::min(best, v);
  }
  return best;
}

void ExpectSimplex(const std::vector<double>& p) {
  for (double v : p) EXPECT_GE(v, -1e-12);
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
}

TEST(ZeroSumGame, TwoByTwoClosedForm) {
  // No saddle point: v = (ad - bc) / (a + d - b - c).
  const Matrix m = {{3, 1}, {0, 2}};
  const auto s = SolveZeroSumGame(m);
  EXPECT_NEAR(s.value, (3.0 * 2 - 1 * 0) / (3 + 2 - 1 - 0.0), 1e-12);
  EXPECT_NEAR(s.row_strategy[0], (2 - 0) / 4.0, 1e-12);
  EXPECT_NEAR(s.col_strategy[0], (2 - 1) / 4.0, 1e-12);
}

TEST(ZeroSumGame, SaddlePoint) {
  const Matrix m = {{4, 5}, {2, 3}};
  const auto s = SolveZeroSumGame(m);
  EXPECT_NEAR(s.value, 3.0, 1e-12);
  EXPECT_NEAR(s.row_strategy[1], 1.0, 1e-12);
  EXPECT_NEAR(s.col_strategy[1], 1.0, 1e-12);
}

TEST(ZeroSumGame, SingleRowAndColumn) {
  EXPECT_NEAR(SolveZeroSumGame({{3}}).value, 3.0, 1e-12);
  EXPECT_NEAR(SolveZeroSumGame({{3, 1, 2}}).value, 3.0, 1e-12);
  EXPECT_NEAR(SolveZeroSumGame({{3}, {2}}).value, 2.0, 1e-12);
}

TEST(ZeroSumGame, NegativeEntriesAreShifted) {
  const Matrix m = {{-3, -1}, {0, -2}};
  EXPECT_NEAR(SolveZeroSumGame(m).value, (6.0 - 0.0) / (-3 - 2 + 1 - 0.0), 1e-12);
}

// Two-row games against an exact envelope oracle.
TEST(ZeroSumGame, TwoRowGamesMatchGridOracle) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> entry(-5, 9);
  for (int trial = 0; trial < 40; ++trial) {
    const int cols = 2 + trial % 5;
    Matrix m(2, std::vector<double>(cols));
    for (auto& r : m) {
      for (auto& v : r) v = entry(rng);
    }
    // The upper envelope over p is convex piecewise linear, so its minimum is
    // at an endpoint or a pairwise intersection.
    std::vector<double> candidates = {0.0, 1.0};
    for (int a = 0; a < cols; ++a) {
      for (int b = a + 1; b < cols; ++b) {
        const double da = m[0][a] - m[1][a];
        const double db = m[0][b] - m[1][b];
        if (da != db) {
          const double p = (m[1][b] - m[1][a]) / (da - db);
          if (p > 0 && p < 1) candidates.push_back(p);
        }
      }
    }
    double want = std::numeric_limits<double>::infinity();
    for (double p : candidates) want = std::min(want, RowGuarantee(m, {p, 1 - p}));
    EXPECT_NEAR(SolveZeroSumGame(m).value, want, 1e-9) << "trial " << trial;
  }
}

TEST(ZeroSumGame, RandomGamesSatisfyTheMinimaxCertificate) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> entry(-10, 10);
  for (int trial = 0; trial < 100; ++trial) {
    const int rows = 1 + trial % 7;
    const int cols = 1 + (trial / 7) % 9;
    Matrix m(rows, std::vector<double>(cols));
    for (auto& r : m) {
      for (auto& v : r) v = entry(rng);
    }
    const auto s = SolveZeroSumGame(m);
    ExpectSimplex(s.row_strategy);
    ExpectSimplex(s.col_strategy);
    EXPECT_NEAR(RowGuarantee(m, s.row_strategy), s.value, 1e-8);
    EXPECT_NEAR(ColGuarantee(m, s.col_strategy), s.value, 1e-8);
  }
}

TEST(ZeroSumGame, DegenerateTiesDoNotCycle) {
  const Matrix m(6, std::vector<double>(6, 1.0));
  const auto s = SolveZeroSumGame(m);
  EXPECT_NEAR(s.value, 1.0, 1e-12);
  Matrix rps = {{0, 1, -1}, {-1, 0, 1}, {1, -1, 0}};
  const auto r = SolveZeroSumGame(rps);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
  for (double p : r.row_strategy) EXPECT_NEAR(p, 1.0 / 3, 1e-12);
}

TEST(ZeroSumGame, RejectsBadInput) {
  auto kind = [](const Matrix& m) {
    try {
      SolveZeroSumGame(m);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIoError;
  };
  EXPECT_EQ(kind({{1, 2}, {3}}), ErrorKind::kDimensionMismatch);
  EXPECT_EQ(kind({}), ErrorKind::kDimensionMismatch);
  EXPECT_EQ(kind({{1, std::nan("")}}), ErrorKind::kInvalidArgument);
}

}  // namespace
}  // namespace hiddenfleet
