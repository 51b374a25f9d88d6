# Copyright 2026 The hiddenfleet Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Latent-layout Battleship: exact minimax, scripted attackers, diagnostics."""

from hiddenfleet._core import (
    Board,
    HiddenfleetError,
    __version__,
    attacker_best_response,
    discounted_return,
    empirical_cvar10,
    empirical_p95,
    evaluate,
    hoeffding_radius,
    layouts,
    marginal_demo,
    run_cli,
    shift_metrics,
    solve_minimax,
)

__all__ = [
    "Board",
    "HiddenfleetError",
    "attacker_best_response",
    "discounted_return",
    "empirical_cvar10",
    "empirical_p95",
    "evaluate",
    "hoeffding_radius",
    "layouts",
    "marginal_demo",
    "run_cli",
    "shift_metrics",
    "solve_minimax",
]
