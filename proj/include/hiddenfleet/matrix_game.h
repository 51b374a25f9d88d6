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

#ifndef HIDDENFLEET_MATRIX_GAME_H_
#define HIDDENFLEET_MATRIX_GAME_H_

#include <vector>

namespace hiddenfleet {

struct MatrixGameSolution {
  // Minimizing row player.
  std::vector<double> row_strategy;
  // Maximizing column player.
  std::vector<double> col_strategy;
  double value = 0.0;
};

// Solves min_x max_y x^T L y for a dense loss matrix with the standard LP
// formulation (dense tableau simplex, Bland's rule). Any optimal vertex is
// accepted when the game is degenerate; the value is unique.
MatrixGameSolution SolveZeroSumGame(const std::vector<std::vector<double>>& loss);

}  // namespace hiddenfleet

#endif  // HIDDENFLEET_MATRIX_GAME_H_
