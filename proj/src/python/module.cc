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


// Python bindings: thin wrappers returning plain dicts and lists.

#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hiddenfleet/attackers.h"
#include "hiddenfleet/cli.h"
#include "hiddenfleet/evaluation.h"
#include "hiddenfleet/exact_game.h"

namespace py = pybind11;

namespace hiddenfleet {
namespace {

LatentDistribution Defender(const BoardConfig& board, const std::string& family,
                            std::optional<double> strength) {
  const Family f = ParseFamily(family);
  return LatentDistribution::Scored(board, {f, strength.value_or(DefaultStrength(f))});
}

std::unique_ptr<AttackerPolicy> Attacker(const BoardConfig& board, const std::string& kind,
                                         int n_particles) {
  if (kind == "random") return std::make_unique<RandomPolicy>();
  if (kind == "probmap") return std::make_unique<ProbMapPolicy>(board);
  if (kind == "particle") {
    ParticleOptions o;
    o.n_particles = n_particles;
    return std::make_unique<ParticlePolicy>(board, o);
  }
  Fail(ErrorKind::kInvalidArgument, "unknown attacker '" + kind + "'");
}

py::dict SolutionDict(const GameSolution& s) {
  py::dict d;
  d["value"] = s.value;
  d["lower"] = s.lower;
  d["upper"] = s.upper;
  d["duality_gap"] = s.duality_gap;
  d["iterations"] = s.iterations;
  d["mu"] = s.mu;
  d["rho"] = s.rho_weights;
  std::vector<std::string> ids;
  for (const auto& p : s.policies) ids.push_back(p.id);
  d["policies"] = ids;
  return d;
}

}  // namespace
}  // namespace hiddenfleet

PYBIND11_MODULE(_core, m) {
  using namespace hiddenfleet;
  m.doc() = "Exact and sampled analysis of latent-layout Battleship";

  // Leaked on purpose: the type must outlive interpreter teardown.
  static PyObject* const error =
      py::exception<Error>(m, "HiddenfleetError", PyExc_RuntimeError).release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const NotConvergedError& e) {
      py::object exc = py::handle(error)(e.what());
      exc.attr("kind") = std::string(ErrorKindName(e.kind()));
      exc.attr("best") = SolutionDict(e.best());
      PyErr_SetObject(error, exc.ptr());
    } catch (const Error& e) {
      py::object exc = py::handle(error)(e.what());
      exc.attr("kind") = std::string(ErrorKindName(e.kind()));
      PyErr_SetObject(error, exc.ptr());
    }
  });

  py::class_<BoardConfig>(m, "Board")
      .def(py::init([](int height, int width, std::vector<int> ship_lengths,
                       std::optional<int> truncation_cap, bool no_touch) {
             BoardConfig c;
             c.height = height;
             c.width = width;
             c.ship_lengths = std::move(ship_lengths);
             c.truncation_cap = truncation_cap;
             c.no_touch = no_touch;
             c.Validate();
             return c;
           }),
           py::arg("height") = 10, py::arg("width") = 10,
           py::arg("ship_lengths") = std::vector<int>{5, 4, 3, 3, 2},
           py::arg("truncation_cap") = py::none(), py::arg("no_touch") = false)
      .def_readonly("height", &BoardConfig::height)
      .def_readonly("width", &BoardConfig::width)
      .def_readonly("ship_lengths", &BoardConfig::ship_lengths)
      .def_readonly("truncation_cap", &BoardConfig::truncation_cap)
      .def_readonly("no_touch", &BoardConfig::no_touch)
      .def_property_readonly("num_cells", &BoardConfig::num_cells)
      .def_property_readonly("horizon", &BoardConfig::horizon)
      .def("key", &BoardConfig::Key)
      .def("__repr__", [](const BoardConfig& c) { return "Board(" + c.Key() + ")"; });

  m.def(
      "layouts",
      [](const BoardConfig& board, std::int64_t guard) {
        std::vector<std::vector<std::vector<int>>> out;
        for (const auto& l : CachedLayoutSet(board, guard)->layouts()) {
          std::vector<std::vector<int>> ships;
          for (int i = 0; i < l.num_ships(); ++i) ships.push_back(l.ship_cells(i));
          out.push_back(std::move(ships));
        }
        return out;
      },
      py::arg("board"), py::arg("guard") = kDefaultEnumerationGuard,
      "Cells of every ship in every legal layout, in library order.");

  m.def(
      "solve_minimax",
      [](const BoardConfig& board, double gap_tol, int max_iters, int max_cells,
         std::int64_t max_layouts) {
        const ExactGuards guards{max_cells, max_layouts};
        const auto u = CachedLayoutSet(board);
        GameSolution s;
        {
          py::gil_scoped_release release;
          s = DoubleOracleSolve(board, DefenderPolytope::Simplex(u), gap_tol, max_iters, guards);
        }
        return SolutionDict(s);
      },
      py::arg("board"), py::arg("gap_tol") = 1e-9, py::arg("max_iters") = 500,
      py::arg("max_cells") = 16, py::arg("max_layouts") = 5000,
      "Double-oracle minimax over the full layout simplex.");

  m.def(
      "attacker_best_response",
      [](const BoardConfig& board, std::vector<double> weights) {
        const auto rho = LatentDistribution::Explicit(CachedLayoutSet(board), std::move(weights),
                                                      "python");
        const auto br = AttackerBestResponse(rho, board);
        py::dict d;
        d["value"] = br.value;
        d["losses"] = br.losses;
        d["table_size"] = br.table->size();
        return d;
      },
      py::arg("board"), py::arg("weights"),
      "Exact best response against a prior over the enumerated layouts.");

  m.def(
      "evaluate",
      [](const BoardConfig& board, const std::string& attacker, const std::string& defender,
         std::optional<double> strength, int n, std::uint64_t seed, int n_particles) {
        const auto policy = Attacker(board, attacker, n_particles);
        const auto dist = Defender(board, defender, strength);
        EvalReport r;
        {
          py::gil_scoped_release release;
          r = Evaluate(*policy, dist, n, board, seed);
        }
        py::dict d;
        d["n"] = r.n;
        d["mean"] = r.mean;
        d["std"] = r.std;
        d["p95"] = r.p95;
        d["cvar10"] = r.cvar10;
        d["truncated"] = r.truncated;
        d["lengths"] = r.lengths;
        d["policy"] = r.policy_id;
        d["distribution"] = r.distribution_id;
        return d;
      },
      py::arg("board"), py::arg("attacker") = "probmap", py::arg("defender") = "UNIFORM",
      py::arg("strength") = py::none(), py::arg("n") = 200, py::arg("seed") = 0,
      py::arg("n_particles") = 1000);

  m.def(
      "shift_metrics",
      [](const BoardConfig& board, const std::string& defender, std::optional<double> strength,
         int n_samples, std::uint64_t seed) {
        const auto s = ComputeShiftMetrics(Defender(board, defender, strength), board, n_samples,
                                           seed);
        py::dict d;
        d["centroid_dist_mean"] = s.centroid_dist_mean;
        d["cluster_score"] = s.cluster_score;
        d["marginal_entropy"] = s.marginal_entropy;
        d["quadrant_mass_std"] = s.quadrant_mass_std;
        d["sample_count"] = s.sample_count;
        return d;
      },
      py::arg("board"), py::arg("defender") = "UNIFORM", py::arg("strength") = py::none(),
      py::arg("n_samples") = 20000, py::arg("seed") = 0);

  m.def("empirical_p95", [](std::vector<double> x) { return EmpiricalP95(x); });
  m.def("empirical_cvar10", [](std::vector<double> x) { return EmpiricalCvar10(x); });
  m.def("discounted_return", &DiscountedReturn, py::arg("tau"), py::arg("gamma"));
  m.def(
      "hoeffding_radius",
      [](const std::vector<std::pair<int, double>>& terms, double t_max, double delta) {
        std::vector<HoeffdingTerm> t;
        for (const auto& [n, w] : terms) t.push_back({n, w});
        return HoeffdingRadius(t, t_max, delta);
      },
      py::arg("terms"), py::arg("t_max"), py::arg("delta"),
      "terms: list of (sample size, weight) pairs.");

  m.def("marginal_demo", [] {
    const auto d = MarginalInsufficiencyDemo();
    py::dict out;
    out["loss_plus"] = d.loss_plus;
    out["loss_minus"] = d.loss_minus;
    out["marginals_plus"] = d.marginals_plus;
    out["marginals_minus"] = d.marginals_minus;
    return out;
  });

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = Dispatch(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a hiddenfleet subcommand; returns (exit_code, stdout, stderr).");

  m.attr("__version__") = kArtifactVersion;
}
