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

#include "hiddenfleet/matrix_game.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hiddenfleet/error.h"

namespace hiddenfleet {

namespace {

constexpr double kPivotEps = 1e-12;

void Normalize(std::vector<double>& v) {
  double total = 0.0;
  for (double& x : v) {
    if (x < 0.0) x = 0.0;
    total += x;
  }
  if (total <= 0.0) {
    std::fill(v.begin(), v.end(), 1.0 / v.size());
    return;
  }
  for (double& x : v) x /= total;
}

}  // namespace

MatrixGameSolution SolveZeroSumGame(const std::vector<std::vector<double>>& loss) {
  const int rows = static_cast<int>(loss.size());
  Require(rows > 0 && !loss[0].empty(), ErrorKind::kDimensionMismatch,
          "empty matrix game");
  const int cols = static_cast<int>(loss[0].size());
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& r : loss) {
    Require(static_cast<int>(r.size()) == cols, ErrorKind::kDimensionMismatch,
            "ragged matrix game");
    for (double x : r) {
      Require(std::isfinite(x), ErrorKind::kInvalidArgument, "non-finite loss entry");
      lo = std::min(lo, x);
    }
  }
  // Shift so every entry is >= 1. The minimizing rows then solve
  //   max sum(x)  s.t.  L^T x <= 1, x >= 0
  // (feasible at the origin, bounded), value = 1/sum(x); the duals of the
  // column constraints give the maximizing columns.
  const double shift = 1.0 - lo;
  const int m = cols;  // constraints
  const int n = rows;  // variables
  const int width = n + m + 1;
  const int rhs = width - 1;
  std::vector<std::vector<double>> t(m + 1, std::vector<double>(width, 0.0));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) t[i][j] = loss[j][i] + shift;
    t[i][n + i] = 1.0;
    t[i][rhs] = 1.0;
  }
  for (int j = 0; j < n; ++j) t[m][j] = -1.0;
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  const int max_pivots = 50 * (rows + cols) + 1000;
  for (int pivots = 0;; ++pivots) {
    Require(pivots < max_pivots, ErrorKind::kNotConverged, "simplex pivot limit reached");
    int enter = -1;
    for (int j = 0; j < n + m; ++j) {
      if (t[m][j] < -kPivotEps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (t[i][enter] <= kPivotEps) continue;
      const double ratio = t[i][rhs] / t[i][enter];
      if (ratio < best_ratio - 1e-15 ||
          (std::abs(ratio - best_ratio) <= 1e-15 && basis[i] < basis[leave])) {
        best_ratio = ratio;
        leave = i;
      }
    }
    Require(leave >= 0, ErrorKind::kNotConverged, "unbounded matrix-game LP");
    const double p = t[leave][enter];
    for (double& x : t[leave]) x /= p;
    for (int i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = t[i][enter];
      if (f == 0.0) continue;
      for (int j = 0; j < width; ++j) t[i][j] -= f * t[leave][j];
    }
    basis[leave] = enter;
  }

  MatrixGameSolution sol;
  sol.row_strategy.assign(rows, 0.0);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) sol.row_strategy[basis[i]] = t[i][rhs];
  }
  sol.col_strategy.assign(cols, 0.0);
  for (int i = 0; i < m; ++i) sol.col_strategy[i] = t[m][n + i];
  const double objective = t[m][rhs];
  Require(objective > 0.0, ErrorKind::kNotConverged, "degenerate matrix-game LP");
  Normalize(sol.col_strategy);
  Normalize(sol.row_strategy);
  sol.value = 1.0 / objective - shift;
  return sol;
}

}  // namespace hiddenfleet
