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

#include "hiddenfleet/cli.h"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "CLI11.hpp"

#include "hiddenfleet/attackers.h"
#include "hiddenfleet/defenders.h"
#include "hiddenfleet/evaluation.h"
#include "hiddenfleet/exact_game.h"
#include "hiddenfleet/format.h"
#include "hiddenfleet/selfplay.h"

namespace hiddenfleet {

using nlohmann::json;

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfigError: return kExitConfig;
    case ErrorKind::kGuardExceeded: return kExitGuard;
    case ErrorKind::kNotConverged: return kExitNotConverged;
    case ErrorKind::kIllegalAction:
    case ErrorKind::kPolicyViolation:
    case ErrorKind::kParticleDepletion:
    case ErrorKind::kPolicyMismatch: return kExitPolicy;
    case ErrorKind::kEmptySupport:
    case ErrorKind::kWeightMismatch:
    case ErrorKind::kZeroPosterior: return kExitDistribution;
    case ErrorKind::kIoError: return kExitIo;
    default: return kExitOther;
  }
}

json DefaultConfigJson() {
  const std::vector<std::string> families = {"UNIFORM", "EDGE", "CLUSTER", "SPREAD", "PARITY"};
  return json{
      {"seed", 0},
      {"workers", 1},
      {"output_dir", "hiddenfleet_out"},
      {"board",
       {{"height", 10},
        {"width", 10},
        {"ship_lengths", {5, 4, 3, 3, 2}},
        {"truncation_cap", nullptr},
        {"no_touch", false},
        {"enumeration_guard", kDefaultEnumerationGuard}}},
      {"sampler", {{"burn_in", 1000}, {"thinning", 10}}},
      {"defenders", json::object()},
      {"attackers", json::object()},
      {"eval",
       {{"n", 200},
        {"delta", 0.05},
        {"attacker", "probmap"},
        {"defenders", {"UNIFORM"}},
        {"nominal", "UNIFORM"},
        {"stress", "SPREAD"},
        {"dump_lengths", false}}},
      {"solver",
       {{"gap_tol", 1e-9},
        {"max_iters", 500},
        {"max_cells", 16},
        {"max_layouts", 5000},
        {"polytope", "simplex"}}},
      {"shift_metrics", {{"n_samples", 20000}, {"defenders", families}}},
      {"stage1",
       {{"regime", "A"},
        {"generations", 3},
        {"budgets", {100}},
        {"eval_generations", {1, 2, 3}},
        {"eval_episodes", 100},
        {"schedule", {0, 1}},
        {"mixture_weight", 0.5},
        {"initial_attacker", "random"},
        {"trainer", "reference"},
        {"trainer_mode", "auto"},
        {"uniform", "UNIFORM"},
        {"stress", "SPREAD"}}},
      {"stage2",
       {{"generations", 3},
        {"lambda", 0.5},
        {"defender_budget", 1},
        {"attacker_budget", 100},
        {"n_scripted", 100},
        {"n_pre_defender", 50},
        {"n_post_defender", 100},
        {"delta", 0.05},
        {"initial_attacker", "random"},
        {"attacker_trainer", "reference"},
        {"trainer_mode", "auto"},
        {"defender_trainer", "polytope"},
        {"polytope", "simplex"},
        {"fixed_defender", "UNIFORM"},
        {"family_box",
         {{"families", families},
          {"min_strength", 0.0},
          {"max_strength", 8.0},
          {"initial_step", 1.0},
          {"eval_episodes", 100}}},
        {"uniform", "UNIFORM"},
        {"stress", "SPREAD"}}},
      {"pareto",
       {{"rho_d", "SPREAD"},
        {"rho_u", "UNIFORM"},
        {"lambdas", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}}}},
  };
}

namespace {

// Blocks whose keys are user-chosen names.
bool IsFreeMap(const std::string& path) { return path == "defenders" || path == "attackers"; }

void Merge(json& base, const json& user, const std::string& path) {
  for (const auto& [key, value] : user.items()) {
    const std::string p = path.empty() ? key : path + "." + key;
    Require(base.contains(key), ErrorKind::kConfigError, "unknown key '" + p + "'");
    json& slot = base[key];
    if (IsFreeMap(p)) {
      Require(value.is_object(), ErrorKind::kConfigError, "'" + p + "' must be an object");
      slot = value;
    } else if (slot.is_object()) {
      Require(value.is_object(), ErrorKind::kConfigError, "'" + p + "' must be an object");
      Merge(slot, value, p);
    } else {
      slot = value;
    }
  }
}

const json& At(const json& root, const std::string& path) {
  const json* node = &root;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    Require(node->is_object() && node->contains(part), ErrorKind::kConfigError,
            "missing key '" + path + "'");
    node = &(*node)[part];
  }
  return *node;
}

std::int64_t Int(const json& root, const std::string& path, std::int64_t min_value) {
  const json& v = At(root, path);
  Require(v.is_number_integer(), ErrorKind::kConfigError, "'" + path + "' must be an integer");
  const std::int64_t x = v.is_number_unsigned()
                             ? static_cast<std::int64_t>(v.get<std::uint64_t>())
                             : v.get<std::int64_t>();
  Require(x >= min_value, ErrorKind::kConfigError,
          "'" + path + "' must be >= " + std::to_string(min_value));
  return x;
}

double Num(const json& root, const std::string& path) {
  const json& v = At(root, path);
  Require(v.is_number(), ErrorKind::kConfigError, "'" + path + "' must be a number");
  return v.get<double>();
}

bool Bool(const json& root, const std::string& path) {
  const json& v = At(root, path);
  Require(v.is_boolean(), ErrorKind::kConfigError, "'" + path + "' must be true or false");
  return v.get<bool>();
}

std::string Str(const json& root, const std::string& path) {
  const json& v = At(root, path);
  Require(v.is_string(), ErrorKind::kConfigError, "'" + path + "' must be a string");
  return v.get<std::string>();
}

template <typename T>
std::vector<T> List(const json& root, const std::string& path) {
  const json& v = At(root, path);
  Require(v.is_array(), ErrorKind::kConfigError, "'" + path + "' must be a list");
  std::vector<T> out;
  for (const auto& e : v) {
    bool ok = false;
    if constexpr (std::is_same_v<T, std::string>) {
      ok = e.is_string();
    } else if constexpr (std::is_integral_v<T>) {
      ok = e.is_number_integer();
    } else {
      ok = e.is_number();
    }
    Require(ok, ErrorKind::kConfigError, "'" + path + "' has an entry of the wrong type");
    out.push_back(e.get<T>());
  }
  return out;
}

bool IsBuiltinDefender(const std::string& name) {
  try {
    ParseFamily(name);
    return true;
  } catch (const Error&) {
    return false;
  }
}

bool IsBuiltinAttacker(const std::string& name) {
  return name == "random" || name == "probmap" || name == "particle";
}

void CheckDefenderRef(const json& data, const std::string& name, const std::string& path) {
  Require(IsBuiltinDefender(name) || data["defenders"].contains(name), ErrorKind::kConfigError,
          "'" + path + "' names unknown defender '" + name + "'");
}

void CheckAttackerRef(const json& data, const std::string& name, const std::string& path) {
  Require(IsBuiltinAttacker(name) || data["attackers"].contains(name), ErrorKind::kConfigError,
          "'" + path + "' names unknown attacker '" + name + "'");
}

void CheckPolytopeRef(const json& data, const std::string& path) {
  const json& v = At(data, path);
  if (v.is_string()) {
    Require(v.get<std::string>() == "simplex", ErrorKind::kConfigError,
            "'" + path + "' must be \"simplex\" or a list of defender names");
    return;
  }
  for (const auto& name : List<std::string>(data, path)) CheckDefenderRef(data, name, path);
}

void CheckOpenUnit(double x, const std::string& path) {
  Require(x > 0.0 && x < 1.0, ErrorKind::kConfigError, "'" + path + "' must lie in (0, 1)");
}

void ValidateBlocks(const json& d) {
  Int(d, "workers", 1);
  Int(d, "sampler.burn_in", 0);
  Int(d, "sampler.thinning", 1);
  Int(d, "eval.n", 1);
  CheckOpenUnit(Num(d, "eval.delta"), "eval.delta");
  CheckAttackerRef(d, Str(d, "eval.attacker"), "eval.attacker");
  for (const auto& n : List<std::string>(d, "eval.defenders")) CheckDefenderRef(d, n, "eval.defenders");
  CheckDefenderRef(d, Str(d, "eval.nominal"), "eval.nominal");
  CheckDefenderRef(d, Str(d, "eval.stress"), "eval.stress");
  Bool(d, "eval.dump_lengths");
  Require(Num(d, "solver.gap_tol") >= 0.0, ErrorKind::kConfigError, "'solver.gap_tol' must be >= 0");
  Int(d, "solver.max_iters", 1);
  Int(d, "solver.max_cells", 1);
  Int(d, "solver.max_layouts", 1);
  CheckPolytopeRef(d, "solver.polytope");
  Int(d, "shift_metrics.n_samples", 100);
  for (const auto& n : List<std::string>(d, "shift_metrics.defenders")) {
    CheckDefenderRef(d, n, "shift_metrics.defenders");
  }
  try {
    ParseRegime(Str(d, "stage1.regime"));
  } catch (const Error&) {
    Fail(ErrorKind::kConfigError, "'stage1.regime' must be A, B or C");
  }
  Int(d, "stage1.generations", 1);
  for (auto b : List<std::int64_t>(d, "stage1.budgets")) {
    Require(b >= 0, ErrorKind::kConfigError, "'stage1.budgets' entries must be >= 0");
  }
  List<int>(d, "stage1.eval_generations");
  Int(d, "stage1.eval_episodes", 1);
  List<int>(d, "stage1.schedule");
  CheckOpenUnit(Num(d, "stage1.mixture_weight"), "stage1.mixture_weight");
  CheckAttackerRef(d, Str(d, "stage1.initial_attacker"), "stage1.initial_attacker");
  const std::string t1 = Str(d, "stage1.trainer");
  Require(t1 == "reference" || t1 == "identity", ErrorKind::kConfigError,
          "'stage1.trainer' must be reference or identity");
  CheckDefenderRef(d, Str(d, "stage1.uniform"), "stage1.uniform");
  CheckDefenderRef(d, Str(d, "stage1.stress"), "stage1.stress");
  for (const char* key : {"stage1.trainer_mode", "stage2.trainer_mode"}) {
    const std::string m = Str(d, key);
    Require(m == "auto" || m == "exact" || m == "heuristic", ErrorKind::kConfigError,
            "'" + std::string(key) + "' must be auto, exact or heuristic");
  }

  Int(d, "stage2.generations", 1);
  CheckOpenUnit(Num(d, "stage2.lambda"), "stage2.lambda");
  Int(d, "stage2.defender_budget", 0);
  Int(d, "stage2.attacker_budget", 0);
  Int(d, "stage2.n_scripted", 1);
  Int(d, "stage2.n_pre_defender", 1);
  Int(d, "stage2.n_post_defender", 1);
  CheckOpenUnit(Num(d, "stage2.delta"), "stage2.delta");
  CheckAttackerRef(d, Str(d, "stage2.initial_attacker"), "stage2.initial_attacker");
  const std::string at = Str(d, "stage2.attacker_trainer");
  Require(at == "reference" || at == "identity", ErrorKind::kConfigError,
          "'stage2.attacker_trainer' must be reference or identity");
  const std::string dt = Str(d, "stage2.defender_trainer");
  Require(dt == "polytope" || dt == "family" || dt == "fixed", ErrorKind::kConfigError,
          "'stage2.defender_trainer' must be polytope, family or fixed");
  CheckPolytopeRef(d, "stage2.polytope");
  CheckDefenderRef(d, Str(d, "stage2.fixed_defender"), "stage2.fixed_defender");
  for (const auto& f : List<std::string>(d, "stage2.family_box.families")) {
    Require(IsBuiltinDefender(f), ErrorKind::kConfigError,
            "'stage2.family_box.families' has unknown family '" + f + "'");
  }
  Require(Num(d, "stage2.family_box.min_strength") <= Num(d, "stage2.family_box.max_strength"),
          ErrorKind::kConfigError, "'stage2.family_box' strength range is empty");
  Require(Num(d, "stage2.family_box.initial_step") > 0.0, ErrorKind::kConfigError,
          "'stage2.family_box.initial_step' must be positive");
  Int(d, "stage2.family_box.eval_episodes", 1);
  CheckDefenderRef(d, Str(d, "stage2.uniform"), "stage2.uniform");
  CheckDefenderRef(d, Str(d, "stage2.stress"), "stage2.stress");

  CheckDefenderRef(d, Str(d, "pareto.rho_d"), "pareto.rho_d");
  CheckDefenderRef(d, Str(d, "pareto.rho_u"), "pareto.rho_u");
  for (double l : List<double>(d, "pareto.lambdas")) CheckOpenUnit(l, "pareto.lambdas");

  for (const auto& [name, spec] : d["defenders"].items()) {
    const std::string p = "defenders." + name;
    Require(spec.is_object() && spec.size() >= 1, ErrorKind::kConfigError,
            "'" + p + "' must be an object");
    if (spec.contains("family")) {
      for (const auto& [k, _] : spec.items()) {
        Require(k == "family" || k == "strength", ErrorKind::kConfigError,
                "unknown key '" + p + "." + k + "'");
      }
      Require(IsBuiltinDefender(Str(d, p + ".family")), ErrorKind::kConfigError,
              "'" + p + ".family' is not a known family");
      if (spec.contains("strength")) Num(d, p + ".strength");
    } else if (spec.contains("weights_file")) {
      Require(spec.size() == 1, ErrorKind::kConfigError, "'" + p + "' has extra keys");
      Str(d, p + ".weights_file");
    } else if (spec.contains("point")) {
      Require(spec.size() == 1, ErrorKind::kConfigError, "'" + p + "' has extra keys");
      Int(d, p + ".point", 0);
    } else if (spec.contains("mixture")) {
      Require(spec.size() == 1 && spec["mixture"].is_array() && !spec["mixture"].empty(),
              ErrorKind::kConfigError, "'" + p + ".mixture' must be a nonempty list");
      for (const auto& part : spec["mixture"]) {
        Require(part.is_object() && part.size() == 2 && part.contains("defender") &&
                    part.contains("weight") && part["defender"].is_string() &&
                    part["weight"].is_number(),
                ErrorKind::kConfigError,
                "'" + p + ".mixture' entries need exactly 'defender' and 'weight'");
        const auto ref = part["defender"].get<std::string>();
        Require(ref != name, ErrorKind::kConfigError, "'" + p + "' refers to itself");
        CheckDefenderRef(d, ref, p + ".mixture");
      }
    } else {
      Fail(ErrorKind::kConfigError,
           "'" + p + "' needs one of family, weights_file, point, mixture");
    }
  }
  for (const auto& [name, spec] : d["attackers"].items()) {
    const std::string p = "attackers." + name;
    Require(spec.is_object(), ErrorKind::kConfigError, "'" + p + "' must be an object");
    const std::string kind = Str(d, p + ".kind");
    std::vector<std::string> allowed = {"kind"};
    if (kind == "probmap") {
      allowed.insert(allowed.end(), {"placement_budget", "parity", "target_base"});
    } else if (kind == "particle") {
      allowed.insert(allowed.end(),
                     {"n_particles", "attempt_budget", "rejuvenation_moves", "resample_fraction"});
    } else if (kind == "table") {
      allowed.push_back("file");
      Str(d, p + ".file");
    } else {
      Require(kind == "random", ErrorKind::kConfigError,
              "'" + p + ".kind' must be random, probmap, particle or table");
    }
    for (const auto& [k, _] : spec.items()) {
      Require(std::find(allowed.begin(), allowed.end(), k) != allowed.end(),
              ErrorKind::kConfigError, "unknown key '" + p + "." + k + "'");
    }
  }
}

}  // namespace

ExperimentConfig ParseConfig(const json& user) {
  Require(user.is_object() || user.is_null(), ErrorKind::kConfigError,
          "config must be an object");
  ExperimentConfig cfg;
  cfg.data = DefaultConfigJson();
  if (user.is_object()) Merge(cfg.data, user, "");
  const json& d = cfg.data;

  cfg.seed = static_cast<std::uint64_t>(Int(d, "seed", 0));
  cfg.workers = static_cast<int>(Int(d, "workers", 1));
  cfg.output_dir = Str(d, "output_dir");

  cfg.board.height = static_cast<int>(Int(d, "board.height", 1));
  cfg.board.width = static_cast<int>(Int(d, "board.width", 1));
  cfg.board.ship_lengths = List<int>(d, "board.ship_lengths");
  if (!At(d, "board.truncation_cap").is_null()) {
    cfg.board.truncation_cap = static_cast<int>(Int(d, "board.truncation_cap", 1));
  }
  cfg.board.no_touch = Bool(d, "board.no_touch");
  Int(d, "board.enumeration_guard", 1);
  try {
    cfg.board.Validate();
  } catch (const Error& e) {
    Fail(ErrorKind::kConfigError, std::string("board: ") + e.what());
  }
  ValidateBlocks(d);
  return cfg;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorKind::kConfigError, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return ParseConfig(json::object());
  json user;
  try {
    user = json::parse(text);
  } catch (const json::parse_error& e) {
    Fail(ErrorKind::kConfigError, "config '" + path + "' is not valid JSON: " + e.what());
  }
  return ParseConfig(user);
}

void ApplyOverride(json& user, const std::string& assignment) {
  const auto eq = assignment.find('=');
  Require(eq != std::string::npos && eq > 0, ErrorKind::kConfigError,
          "override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &user;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object()) {
      (*node)[parts[i]] = json::object();
    }
    node = &(*node)[parts[i]];
  }
  (*node)[parts.back()] = value;
}

namespace {

class Registry {
 public:
  explicit Registry(const ExperimentConfig& cfg) : cfg_(cfg) {
    sampler_.burn_in = static_cast<int>(Int(cfg.data, "sampler.burn_in", 0));
    sampler_.thinning = static_cast<int>(Int(cfg.data, "sampler.thinning", 1));
    sampler_.enumeration_guard = Int(cfg.data, "board.enumeration_guard", 1);
  }

  std::shared_ptr<const LayoutSet> Universe() const {
    return CachedLayoutSet(cfg_.board, sampler_.enumeration_guard);
  }

  std::shared_ptr<const LayoutSet> RequireUniverse(const std::string& why) const {
    auto u = Universe();
    Require(u != nullptr, ErrorKind::kGuardExceeded,
            why + " needs an enumerable board (raise board.enumeration_guard or shrink the board)");
    return u;
  }

  LatentDistribution Defender(const std::string& name) {
    if (auto it = defenders_.find(name); it != defenders_.end()) return it->second;
    Require(depth_++ < 32, ErrorKind::kConfigError, "defender mixtures nest too deeply");
    LatentDistribution d = Build(name);
    --depth_;
    defenders_.emplace(name, d);
    return d;
  }

  std::unique_ptr<AttackerPolicy> Attacker(const std::string& name) {
    const json& specs = cfg_.data["attackers"];
    if (!specs.contains(name)) {
      if (name == "random") return std::make_unique<RandomPolicy>();
      if (name == "probmap") return std::make_unique<ProbMapPolicy>(cfg_.board);
      if (name == "particle") return std::make_unique<ParticlePolicy>(cfg_.board);
      Fail(ErrorKind::kConfigError, "unknown attacker '" + name + "'");
    }
    const json& s = specs[name];
    const std::string kind = s["kind"];
    if (kind == "random") return std::make_unique<RandomPolicy>();
    if (kind == "probmap") {
      ProbMapOptions o;
      o.placement_budget = s.value("placement_budget", o.placement_budget);
      o.parity = s.value("parity", o.parity);
      o.target_base = s.value("target_base", o.target_base);
      return std::make_unique<ProbMapPolicy>(cfg_.board, o);
    }
    if (kind == "particle") {
      ParticleOptions o;
      o.n_particles = s.value("n_particles", o.n_particles);
      o.attempt_budget = s.value("attempt_budget", o.attempt_budget);
      o.rejuvenation_moves = s.value("rejuvenation_moves", o.rejuvenation_moves);
      o.resample_fraction = s.value("resample_fraction", o.resample_fraction);
      return std::make_unique<ParticlePolicy>(cfg_.board, o);
    }
    const std::string file = s["file"];
    std::ifstream in(file);
    Require(in.good(), ErrorKind::kIoError, "cannot open policy table '" + file + "'");
    auto table = std::make_shared<DeterministicPolicyTable>(DeterministicPolicyTable::Read(in));
    return std::make_unique<TablePolicy>(std::move(table), name);
  }

  DefenderPolytope Polytope(const std::string& path) {
    const json& v = At(cfg_.data, path);
    if (v.is_string()) return DefenderPolytope::Simplex(RequireUniverse("a simplex polytope"));
    std::vector<LatentDistribution> gens;
    for (const auto& name : v) {
      auto d = Defender(name.get<std::string>());
      Require(d.is_explicit(), ErrorKind::kConfigError,
              "'" + path + "' member '" + name.get<std::string>() +
                  "' is not explicit on this board");
      gens.push_back(d);
    }
    return DefenderPolytope(std::move(gens));
  }

  const SamplerSettings& sampler() const { return sampler_; }

 private:
  LatentDistribution Scored(FamilySpec spec) {
    auto d = LatentDistribution::Scored(cfg_.board, spec, sampler_);
    auto m = d.Materialize(cfg_.board, sampler_.enumeration_guard);
    return m ? *m : d;
  }

  LatentDistribution Build(const std::string& name) {
    const json& specs = cfg_.data["defenders"];
    if (!specs.contains(name)) {
      const Family f = ParseFamily(name);
      return Scored(FamilySpec::Default(f));
    }
    const json& s = specs[name];
    if (s.contains("family")) {
      const Family f = ParseFamily(s["family"].get<std::string>());
      return Scored({f, s.value("strength", DefaultStrength(f))});
    }
    if (s.contains("weights_file")) {
      const std::string file = s["weights_file"];
      std::ifstream in(file);
      Require(in.good(), ErrorKind::kIoError, "cannot open weight file '" + file + "'");
      return LoadExplicitWeightsCsv(in, RequireUniverse("defenders." + name), name);
    }
    if (s.contains("point")) {
      auto u = RequireUniverse("defenders." + name);
      const auto idx = s["point"].get<std::size_t>();
      Require(idx < u->size(), ErrorKind::kConfigError,
              "'defenders." + name + ".point' is out of range");
      return LatentDistribution::PointMass(u, idx);
    }
    std::vector<LatentDistribution> parts;
    std::vector<double> weights;
    for (const auto& part : s["mixture"]) {
      parts.push_back(Defender(part["defender"].get<std::string>()));
      weights.push_back(part["weight"].get<double>());
    }
    return LatentDistribution::Mixture(std::move(parts), std::move(weights));
  }

  const ExperimentConfig& cfg_;
  SamplerSettings sampler_;
  std::map<std::string, LatentDistribution> defenders_;
  int depth_ = 0;
};

struct RunContext {
  const ExperimentConfig& cfg;
  Registry& registry;
  std::filesystem::path out_dir;
  std::ostream& out;
  json outputs = json::object();
  json seeds = json::object();
  json results = json::object();

  std::ofstream Open(const std::string& name, const std::string& key) {
    const auto path = out_dir / name;
    std::ofstream f(path);
    Require(f.good(), ErrorKind::kIoError, "cannot write '" + path.string() + "'");
    outputs[key] = name;
    return f;
  }
};

std::uint64_t StreamSeed(const ExperimentConfig& cfg, const std::string& label) {
  return DeriveSeed(cfg.seed, {HistoryHash(label)});
}

ReferenceAttackerOptions TrainerOptions(const ExperimentConfig& cfg, const std::string& mode) {
  ReferenceAttackerOptions o;
  o.mode = mode == "exact"       ? ReferenceAttackerOptions::Mode::kExact
           : mode == "heuristic" ? ReferenceAttackerOptions::Mode::kHeuristic
                                 : ReferenceAttackerOptions::Mode::kAuto;
  o.guards.max_cells = static_cast<int>(Int(cfg.data, "solver.max_cells", 1));
  o.guards.max_layouts = Int(cfg.data, "solver.max_layouts", 1);
  o.enumeration_guard = Int(cfg.data, "board.enumeration_guard", 1);
  o.workers = cfg.workers;
  return o;
}

std::unique_ptr<AttackerTrainer> MakeAttackerTrainer(const ExperimentConfig& cfg,
                                                     const std::string& kind,
                                                     const std::string& mode) {
  if (kind == "identity") return std::make_unique<IdentityAttackerTrainer>();
  return std::make_unique<ReferenceAttackerTrainer>(cfg.board, TrainerOptions(cfg, mode));
}

void RunEval(RunContext& ctx) {
  const json& d = ctx.cfg.data;
  auto attacker = ctx.registry.Attacker(Str(d, "eval.attacker"));
  const int n = static_cast<int>(Int(d, "eval.n", 1));
  std::vector<EvalReport> reports;
  for (const auto& name : List<std::string>(d, "eval.defenders")) {
    const std::uint64_t seed = StreamSeed(ctx.cfg, "eval:" + name);
    ctx.seeds["eval:" + name] = seed;
    reports.push_back(Evaluate(*attacker, ctx.registry.Defender(name), n, ctx.cfg.board, seed,
                               ctx.cfg.workers));
    const auto& r = reports.back();
    ctx.out << r.policy_id << " on " << name << ": mean " << FormatFixed(r.mean, 3) << " std "
            << FormatFixed(r.std, 3) << " p95 " << FormatFixed(r.p95, 3) << " cvar10 "
            << FormatFixed(r.cvar10, 3) << "\n";
    if (Bool(d, "eval.dump_lengths")) {
      auto f = ctx.Open("lengths_" + name + ".csv", "lengths:" + name);
      WriteLengthsCsv(f, r);
    }
    ctx.results[name] = {{"mean", r.mean}, {"p95", r.p95}, {"cvar10", r.cvar10}};
  }
  auto f = ctx.Open("eval.csv", "eval");
  WriteEvalReportCsv(f, reports);
}

void RunGaps(RunContext& ctx) {
  const json& d = ctx.cfg.data;
  auto attacker = ctx.registry.Attacker(Str(d, "eval.attacker"));
  const int n = static_cast<int>(Int(d, "eval.n", 1));
  const std::string nom = Str(d, "eval.nominal");
  const std::string str = Str(d, "eval.stress");
  const std::uint64_t s_nom = StreamSeed(ctx.cfg, "gaps:nominal:" + nom);
  const std::uint64_t s_str = StreamSeed(ctx.cfg, "gaps:stress:" + str);
  ctx.seeds["gaps:nominal"] = s_nom;
  ctx.seeds["gaps:stress"] = s_str;
  std::vector<EvalReport> reports = {
      Evaluate(*attacker, ctx.registry.Defender(nom), n, ctx.cfg.board, s_nom, ctx.cfg.workers),
      Evaluate(*attacker, ctx.registry.Defender(str), n, ctx.cfg.board, s_str, ctx.cfg.workers)};
  const GapReport gaps = RobustnessGaps(reports[0], reports[1]);
  const double delta = Num(d, "eval.delta");
  const CertificateReport cert =
      CertifyDifference(gaps.mean_gap, {{n, 1.0}, {n, 1.0}}, ctx.cfg.board.horizon(), delta);
  {
    auto f = ctx.Open("eval.csv", "eval");
    WriteEvalReportCsv(f, reports);
  }
  {
    auto f = ctx.Open("gaps.csv", "gaps");
    WriteGapCsv(f, reports[0], reports[1], gaps);
  }
  {
    auto f = ctx.Open("certificate.csv", "certificate");
    f << "delta_hat,radius,delta,sign_certified,n_nominal,n_stress,t_max\n"
      << FormatFixed(cert.delta_hat) << ',' << FormatFixed(cert.radius) << ','
      << FormatFixed(delta) << ',' << (cert.sign_certified ? 1 : 0) << ',' << n << ',' << n
      << ',' << ctx.cfg.board.horizon() << "\n";
  }
  ctx.out << "mean_gap " << FormatFixed(gaps.mean_gap, 3) << " p95_gap "
          << FormatFixed(gaps.p95_gap, 3) << " cvar_gap " << FormatFixed(gaps.cvar_gap, 3)
          << " radius " << FormatFixed(cert.radius, 3)
          << (cert.sign_certified ? " (sign certified)" : " (sign not certified)") << "\n";
  ctx.results = {{"mean_gap", gaps.mean_gap},
                 {"p95_gap", gaps.p95_gap},
                 {"cvar_gap", gaps.cvar_gap},
                 {"radius", cert.radius},
                 {"sign_certified", cert.sign_certified}};
}

void WriteSolution(RunContext& ctx, const GameSolution& sol) {
  {
    auto f = ctx.Open("solution.txt", "solution");
    WriteSolutionManifest(f, sol);
  }
  {
    auto f = ctx.Open("loss_matrix.csv", "loss_matrix");
    sol.matrix.WriteCsv(f);
  }
  {
    auto f = ctx.Open("trace.csv", "trace");
    WriteIterationTraceCsv(f, sol.trace);
  }
  {
    auto f = ctx.Open("rho.csv", "rho");
    f << "layout,weight\n";
    for (std::size_t z = 0; z < sol.rho_weights.size(); ++z) {
      f << z << ',' << FormatFixed(sol.rho_weights[z], 12) << "\n";
    }
  }
  {
    auto f = ctx.Open("mu.csv", "mu");
    f << "policy,weight\n";
    for (std::size_t r = 0; r < sol.mu.size(); ++r) {
      f << sol.policies[r].id << ',' << FormatFixed(sol.mu[r], 12) << "\n";
    }
  }
  for (std::size_t r = 0; r < sol.policies.size(); ++r) {
    if (sol.mu[r] <= 0.0) continue;
    auto f = ctx.Open("policy_" + sol.policies[r].id + ".tsv", "policy:" + sol.policies[r].id);
    sol.policies[r].table->Write(f);
  }
  ctx.results = {{"value", sol.value},
                 {"duality_gap", sol.duality_gap},
                 {"lower", sol.lower},
                 {"upper", sol.upper},
                 {"iterations", sol.iterations}};
  ctx.out << "value = " << FormatExact(sol.value) << "\n"
          << "duality_gap = " << FormatExact(sol.duality_gap) << "\n"
          << "iterations = " << sol.iterations << "\n";
}

void RunSolve(RunContext& ctx) {
  const json& d = ctx.cfg.data;
  const auto polytope = ctx.registry.Polytope("solver.polytope");
  ExactGuards guards;
  guards.max_cells = static_cast<int>(Int(d, "solver.max_cells", 1));
  guards.max_layouts = Int(d, "solver.max_layouts", 1);
  try {
    const GameSolution sol =
        DoubleOracleSolve(ctx.cfg.board, polytope, Num(d, "solver.gap_tol"),
                          static_cast<int>(Int(d, "solver.max_iters", 1)), guards);
    WriteSolution(ctx, sol);
  } catch (const NotConvergedError& e) {
    WriteSolution(ctx, e.best());
    throw;
  }
}

void RunShiftMetrics(RunContext& ctx) {
  const json& d = ctx.cfg.data;
  const int n = static_cast<int>(Int(d, "shift_metrics.n_samples", 100));
  std::vector<std::pair<std::string, ShiftMetrics>> rows;
  for (const auto& name : List<std::string>(d, "shift_metrics.defenders")) {
    const std::uint64_t seed = StreamSeed(ctx.cfg, "shift:" + name);
    ctx.seeds["shift:" + name] = seed;
    rows.emplace_back(name,
                      ComputeShiftMetrics(ctx.registry.Defender(name), ctx.cfg.board, n, seed));
  }
  auto f = ctx.Open("shift_metrics.csv", "shift_metrics");
  WriteShiftMetricsCsv(f, rows);
  WriteShiftMetricsCsv(ctx.out, rows);
  ctx.results["uniform_reference_marginals"] = UniformReferenceMarginals(ctx.cfg.board);
}

void RunStage1Command(RunContext& ctx) {
  const json& d = ctx.cfg.data;
  Stage1Config c;
  c.board = ctx.cfg.board;
  c.regime = ParseRegime(Str(d, "stage1.regime"));
  c.generations = static_cast<int>(Int(d, "stage1.generations", 1));
  c.budgets = List<std::int64_t>(d, "stage1.budgets");
  c.eval_generations = List<int>(d, "stage1.eval_generations");
  c.eval_episodes = static_cast<int>(Int(d, "stage1.eval_episodes", 1));
  c.schedule = List<int>(d, "stage1.schedule");
  c.seed = StreamSeed(ctx.cfg, "stage1");
  c.workers = ctx.cfg.workers;
  ctx.seeds["stage1"] = c.seed;
  auto uniform = ctx.registry.Defender(Str(d, "stage1.uniform"));
  auto stress = ctx.registry.Defender(Str(d, "stage1.stress"));
  const double w = Num(d, "stage1.mixture_weight");
  std::optional<LatentDistribution> mixture =
      LatentDistribution::Mixture({stress, uniform}, {w, 1.0 - w});
  auto initial = ctx.registry.Attacker(Str(d, "stage1.initial_attacker"));
  auto trainer =
      MakeAttackerTrainer(ctx.cfg, Str(d, "stage1.trainer"), Str(d, "stage1.trainer_mode"));
  const Stage1Result r = RunStage1(c, *initial, *trainer, uniform, stress, mixture);
  auto f = ctx.Open("stage1_trace.csv", "stage1_trace");
  WriteStage1TraceCsv(f, r.trace);
  WriteStage1TraceCsv(ctx.out, r.trace);
  ctx.results = {{"final_policy", r.policy->id()},
                 {"trainer", trainer->id()},
                 {"budget_unit", trainer->budget_unit()},
                 {"training_distributions", r.training_ids}};
}

void RunStage2Command(RunContext& ctx) {
  const json& d = ctx.cfg.data;
  Stage2Config c;
  c.board = ctx.cfg.board;
  c.generations = static_cast<int>(Int(d, "stage2.generations", 1));
  c.lambda = Num(d, "stage2.lambda");
  c.defender_budget = Int(d, "stage2.defender_budget", 0);
  c.attacker_budget = Int(d, "stage2.attacker_budget", 0);
  c.n_scripted = static_cast<int>(Int(d, "stage2.n_scripted", 1));
  c.n_pre_defender = static_cast<int>(Int(d, "stage2.n_pre_defender", 1));
  c.n_post_defender = static_cast<int>(Int(d, "stage2.n_post_defender", 1));
  c.delta = Num(d, "stage2.delta");
  c.seed = StreamSeed(ctx.cfg, "stage2");
  c.workers = ctx.cfg.workers;
  ctx.seeds["stage2"] = c.seed;

  auto uniform = ctx.registry.Defender(Str(d, "stage2.uniform"));
  auto stress = ctx.registry.Defender(Str(d, "stage2.stress"));
  auto initial = ctx.registry.Attacker(Str(d, "stage2.initial_attacker"));
  auto attacker_trainer = MakeAttackerTrainer(ctx.cfg, Str(d, "stage2.attacker_trainer"),
                                              Str(d, "stage2.trainer_mode"));
  std::unique_ptr<DefenderTrainer> defender_trainer;
  const std::string dt = Str(d, "stage2.defender_trainer");
  if (dt == "polytope") {
    defender_trainer =
        std::make_unique<PolytopeDefenderTrainer>(ctx.registry.Polytope("stage2.polytope"));
  } else if (dt == "family") {
    FamilyBox box;
    box.families.clear();
    for (const auto& f : List<std::string>(d, "stage2.family_box.families")) {
      box.families.push_back(ParseFamily(f));
    }
    Require(!box.families.empty(), ErrorKind::kConfigError,
            "'stage2.family_box.families' is empty");
    box.min_strength = Num(d, "stage2.family_box.min_strength");
    box.max_strength = Num(d, "stage2.family_box.max_strength");
    box.initial_step = Num(d, "stage2.family_box.initial_step");
    defender_trainer = std::make_unique<FamilyDefenderTrainer>(
        ctx.cfg.board, box, static_cast<int>(Int(d, "stage2.family_box.eval_episodes", 1)),
        ctx.cfg.workers);
  } else {
    defender_trainer = std::make_unique<FixedDefenderTrainer>(
        ctx.registry.Defender(Str(d, "stage2.fixed_defender")));
  }
  const Stage2Result r =
      RunStage2(c, *initial, *attacker_trainer, *defender_trainer, uniform, stress);
  auto f = ctx.Open("generation_log.csv", "generation_log");
  WriteGenerationLogCsv(f, r.logs);
  WriteGenerationLogCsv(ctx.out, r.logs);
  ctx.results = {{"attacker_trainer", attacker_trainer->id()},
                 {"defender_trainer", defender_trainer->id()},
                 {"attacker_budget_unit", attacker_trainer->budget_unit()},
                 {"final_attacker", r.final_attacker->id()}};
}

void RunDemoMarginal(RunContext& ctx) {
  const MarginalDemo demo = MarginalInsufficiencyDemo();
  auto f = ctx.Open("demo_marginal.csv", "demo_marginal");
  f << "distribution,loss,marginal_z1,marginal_z2\n"
    << "rho_plus," << FormatFixed(demo.loss_plus) << ',' << FormatFixed(demo.marginals_plus[0])
    << ',' << FormatFixed(demo.marginals_plus[1]) << "\n"
    << "rho_minus," << FormatFixed(demo.loss_minus) << ','
    << FormatFixed(demo.marginals_minus[0]) << ',' << FormatFixed(demo.marginals_minus[1])
    << "\n";
  ctx.out << "loss under rho_plus  = " << FormatExact(demo.loss_plus) << "\n"
          << "loss under rho_minus = " << FormatExact(demo.loss_minus) << "\n"
          << "marginals rho_plus   = (" << FormatExact(demo.marginals_plus[0]) << ", "
          << FormatExact(demo.marginals_plus[1]) << ")\n"
          << "marginals rho_minus  = (" << FormatExact(demo.marginals_minus[0]) << ", "
          << FormatExact(demo.marginals_minus[1]) << ")\n";
  ctx.results = {{"loss_plus", demo.loss_plus},
                 {"loss_minus", demo.loss_minus},
                 {"marginals_plus", demo.marginals_plus},
                 {"marginals_minus", demo.marginals_minus}};
}

void RunPareto(RunContext& ctx) {
  const json& d = ctx.cfg.data;
  auto rho_d = ctx.registry.Defender(Str(d, "pareto.rho_d"));
  auto rho_u = ctx.registry.Defender(Str(d, "pareto.rho_u"));
  Require(rho_d.is_explicit() && rho_u.is_explicit(), ErrorKind::kGuardExceeded,
          "pareto-sweep needs explicit distributions on an enumerable board");
  ExactGuards guards;
  guards.max_cells = static_cast<int>(Int(d, "solver.max_cells", 1));
  guards.max_layouts = Int(d, "solver.max_layouts", 1);
  const auto lambdas = List<double>(d, "pareto.lambdas");
  const auto points = ScalarizationSweep(rho_d, rho_u, lambdas, ctx.cfg.board, guards);
  const auto dominated = DominatedPoints(points);
  auto f = ctx.Open("pareto.csv", "pareto");
  WriteParetoCsv(f, points);
  WriteParetoCsv(ctx.out, points);
  ctx.results = {{"points", points.size()}, {"dominated", dominated.size()}};
}

const std::map<std::string, std::pair<std::string, std::function<void(RunContext&)>>>&
Commands() {
  static const auto* commands =
      new std::map<std::string, std::pair<std::string, std::function<void(RunContext&)>>>{
          {"eval", {"Evaluate an attacker on each configured defender", RunEval}},
          {"gaps", {"Robustness gaps and sign certificate, nominal vs stress", RunGaps}},
          {"solve-minimax", {"Exact double-oracle minimax on an enumerable board", RunSolve}},
          {"shift-metrics", {"Defender shift metrics table", RunShiftMetrics}},
          {"run-stage1", {"Stage-1 attacker training loop", RunStage1Command}},
          {"run-stage2", {"Stage-2 restricted iterative best response", RunStage2Command}},
          {"demo-marginal", {"Marginal-insufficiency counterexample", RunDemoMarginal}},
          {"pareto-sweep", {"Nominal/adversarial scalarization sweep", RunPareto}},
      };
  return *commands;
}

int RunCommand(const std::string& command, const ExperimentConfig& cfg,
               const std::string& out_override, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  Registry registry(cfg);
  std::filesystem::path dir = out_override.empty() ? cfg.output_dir : out_override;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  Require(!ec, ErrorKind::kIoError, "cannot create output directory '" + dir.string() + "'");
  RunContext ctx{cfg, registry, dir, out};
  ctx.seeds["master"] = cfg.seed;

  std::string failure;
  int code = kExitOk;
  try {
    Commands().at(command).second(ctx);
  } catch (const Error& e) {
    failure = e.what();
    code = ExitCodeFor(e.kind());
    if (code != kExitNotConverged) throw;
  }
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  json manifest = {
      {"format", "hiddenfleet-manifest-v1"},
      {"artifact_version", kArtifactVersion},
      {"command", command},
      {"config", cfg.data},
      {"seeds", ctx.seeds},
      {"outputs", ctx.outputs},
      {"results", ctx.results},
      {"file_formats",
       {{"csv", "header row, comma separated, '.' decimal point, fixed precision"},
        {"solution", "hiddenfleet-solution-v1 key = value lines"},
        {"policy_table", "hash<TAB>history<TAB>cell lines"}}},
      {"timings_ms", {{"total", ms}}},
  };
  if (!failure.empty()) manifest["error"] = failure;
  std::ofstream f(dir / "manifest.json");
  Require(f.good(), ErrorKind::kIoError, "cannot write manifest in '" + dir.string() + "'");
  f << manifest.dump(2) << "\n";
  if (!failure.empty()) throw Error(ErrorKind::kNotConverged, failure);
  return code;
}

}  // namespace

int Dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"hiddenfleet: adversarial latent-initial-state Battleship workbench",
               "hiddenfleet"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string out_dir;
  std::string manifest_path;
  std::vector<std::string> overrides;
  for (const auto& [name, entry] : Commands()) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("-c,--config", config_path,
                    std::string("JSON config (default: $") + kConfigEnvVar + ")");
    sub->add_option("--set", overrides, "Override a config key, e.g. --set eval.n=500");
    sub->add_option("-o,--out", out_dir, "Output directory (default: config output_dir)");
    sub->add_option("--manifest", manifest_path, "Replay the config stored in a run manifest");
  }
  app.footer(
      "Exit codes: 0 ok, 1 usage, 2 config error, 3 guard exceeded, 4 not converged,\n"
      "5 policy/particle failure, 6 distribution error, 7 I/O error, 8 other error.");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    json user = json::object();
    if (!manifest_path.empty()) {
      Require(config_path.empty() && overrides.empty(), ErrorKind::kConfigError,
              "--manifest cannot be combined with --config or --set");
      std::ifstream in(manifest_path);
      Require(in.good(), ErrorKind::kIoError, "cannot open manifest '" + manifest_path + "'");
      json manifest;
      try {
        manifest = json::parse(in);
      } catch (const json::parse_error& e) {
        Fail(ErrorKind::kConfigError, std::string("manifest is not valid JSON: ") + e.what());
      }
      Require(manifest.value("command", "") == command, ErrorKind::kConfigError,
              "manifest was written by '" + manifest.value("command", "") + "', not '" +
                  command + "'");
      user = manifest.at("config");
    } else {
      if (config_path.empty()) {
        if (const char* env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0') {
          config_path = env;
        }
      }
      if (!config_path.empty()) user = LoadConfig(config_path).data;
      for (const auto& o : overrides) ApplyOverride(user, o);
    }
    const ExperimentConfig cfg = ParseConfig(user);
    return RunCommand(command, cfg, out_dir, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitOther;
  }
}

}  // namespace hiddenfleet
