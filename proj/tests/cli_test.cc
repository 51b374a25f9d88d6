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


#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "hiddenfleet/cli.h"

namespace hiddenfleet {
namespace {

namespace fs = std::filesystem;

const fs::path kSource = HIDDENFLEET_SOURCE_DIR;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome Call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = Dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hiddenfleet_cli_" + std::string(
               ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path Write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

TEST_F(CliTest, DemoMarginalPrintsBothLosses) {
  const Outcome r = Call({"demo-marginal", "-o", (dir_ / "demo").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("loss under rho_plus  = 0\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("loss under rho_minus = 1\n"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(dir_ / "demo" / "demo_marginal.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "demo" / "manifest.json"));
}

TEST_F(CliTest, SolveOneByThree) {
  const auto out = dir_ / "solve";
  const Outcome r = Call({"solve-minimax", "-c", (kSource / "configs/solve_1x3.json").string(), "-o",
                      out.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto m = nlohmann::json::parse(Slurp(out / "manifest.json"));
  EXPECT_EQ(m["command"], "solve-minimax");
  EXPECT_EQ(m["format"], "hiddenfleet-manifest-v1");
  EXPECT_EQ(m["config"]["seed"], 7);
  EXPECT_NEAR(m["results"]["value"].get<double>(), 2.5, 1e-9);
  for (const char* f : {"solution.txt", "loss_matrix.csv", "trace.csv", "rho.csv", "mu.csv"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
}

TEST_F(CliTest, ManifestReplayReproducesOutputs) {
  const auto first = dir_ / "first";
  const auto second = dir_ / "second";
  ASSERT_EQ(Call({"run-stage2", "-c", (kSource / "configs/stage2_example.json").string(), "-o",
                  first.string(), "--set", "stage2.generations=2"})
                .code,
            kExitOk);
  const Outcome r = Call({"run-stage2", "--manifest", (first / "manifest.json").string(), "-o",
                      second.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(Slurp(first / "generation_log.csv"), Slurp(second / "generation_log.csv"));
  EXPECT_FALSE(Slurp(first / "generation_log.csv").empty());

  // A manifest only replays its own subcommand.
  const Outcome wrong = Call({"eval", "--manifest", (first / "manifest.json").string()});
  EXPECT_EQ(wrong.code, kExitConfig);
  const Outcome mixed = Call({"run-stage2", "--manifest", (first / "manifest.json").string(),
                          "--set", "seed=1"});
  EXPECT_EQ(mixed.code, kExitConfig);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(Call({}).code, kExitUsage);
  EXPECT_EQ(Call({"no-such-command"}).code, kExitUsage);
  EXPECT_EQ(Call({"eval", "--bogus"}).code, kExitUsage);
  const Outcome help = Call({"--help"});
  EXPECT_EQ(help.code, kExitOk);
  EXPECT_NE(help.out.find("solve-minimax"), std::string::npos);
}

TEST_F(CliTest, ConfigErrorsNameTheKey) {
  const Outcome lambda = Call({"run-stage2", "--set", "stage2.lambda=1.5", "-o", dir_.string()});
  EXPECT_EQ(lambda.code, kExitConfig);
  EXPECT_NE(lambda.err.find("stage2.lambda"), std::string::npos) << lambda.err;

  const Outcome unknown = Call({"eval", "-c", Write("u.json", R"({"eval":{"nn":3}})").string()});
  EXPECT_EQ(unknown.code, kExitConfig);
  EXPECT_NE(unknown.err.find("nn"), std::string::npos) << unknown.err;

  const Outcome typed = Call({"eval", "--set", "board.height=\"tall\""});
  EXPECT_EQ(typed.code, kExitConfig);
  EXPECT_NE(typed.err.find("board.height"), std::string::npos) << typed.err;

  const Outcome broken = Call({"eval", "-c", Write("b.json", "{").string()});
  EXPECT_EQ(broken.code, kExitConfig);

  const Outcome missing = Call({"eval", "-c", (dir_ / "absent.json").string()});
  EXPECT_NE(missing.code, kExitOk);
}

TEST_F(CliTest, EmptyConfigMeansDefaults) {
  const auto cfg = LoadConfig(Write("empty.json", " \n").string());
  EXPECT_EQ(cfg.data, DefaultConfigJson());
  EXPECT_EQ(cfg.board.height, 10);
  EXPECT_EQ(cfg.board.ship_lengths, (std::vector<int>{5, 4, 3, 3, 2}));
  EXPECT_EQ(cfg.seed, 0u);
}

TEST_F(CliTest, OverridesParseJsonOrFallBackToStrings) {
  nlohmann::json user = nlohmann::json::object();
  ApplyOverride(user, "eval.n=500");
  ApplyOverride(user, "eval.attacker=particle");
  ApplyOverride(user, "board.ship_lengths=[3,2]");
  EXPECT_EQ(user["eval"]["n"], 500);
  EXPECT_EQ(user["eval"]["attacker"], "particle");
  EXPECT_EQ(user["board"]["ship_lengths"], nlohmann::json::parse("[3,2]"));
  EXPECT_THROW(ApplyOverride(user, "no_equals_sign"), Error);
}

TEST_F(CliTest, BundledConfigsParseAndRoundTrip) {
  for (const char* name : {"solve_1x3.json", "stage2_example.json"}) {
    const auto cfg = LoadConfig((kSource / "configs" / name).string());
    EXPECT_EQ(ParseConfig(cfg.data).data, cfg.data) << name;
  }
}

TEST_F(CliTest, EnvironmentSuppliesTheConfig) {
  const auto path = Write("env.json", R"({"board":{"height":1,"width":3,"ship_lengths":[2]}})");
  ::setenv(kConfigEnvVar, path.c_str(), 1);
  const Outcome r = Call({"solve-minimax", "-o", (dir_ / "env").string()});
  ::unsetenv(kConfigEnvVar);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto m = nlohmann::json::parse(Slurp(dir_ / "env" / "manifest.json"));
  EXPECT_EQ(m["config"]["board"]["width"], 3);
}

TEST_F(CliTest, GuardFailureExitCode) {
  const Outcome r = Call({"solve-minimax", "-o", dir_.string(), "--set", "solver.max_layouts=10",
                      "--set", "board.height=3", "--set", "board.width=3", "--set",
                      "board.ship_lengths=[3,2]"});
  EXPECT_EQ(r.code, kExitGuard) << r.err;
}

TEST_F(CliTest, NotConvergedWritesBestIterate) {
  const Outcome r = Call({"solve-minimax", "-o", dir_.string(), "--set", "board.height=3", "--set",
                      "board.width=3", "--set", "board.ship_lengths=[2]", "--set",
                      "solver.max_iters=1"});
  EXPECT_EQ(r.code, kExitNotConverged) << r.err;
  const auto m = nlohmann::json::parse(Slurp(dir_ / "manifest.json"));
  EXPECT_TRUE(m.contains("error"));
  EXPECT_TRUE(fs::exists(dir_ / "solution.txt"));
}

TEST(ExitCodes, EveryErrorKindMaps) {
  EXPECT_EQ(ExitCodeFor(ErrorKind::kConfigError), kExitConfig);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kGuardExceeded), kExitGuard);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kNotConverged), kExitNotConverged);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kPolicyViolation), kExitPolicy);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kIoError), kExitIo);
}

}  // namespace
}  // namespace hiddenfleet
