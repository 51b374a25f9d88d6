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

// Experiment runner: configuration, subcommand dispatch and run manifests.

#ifndef HIDDENFLEET_CLI_H_
#define HIDDENFLEET_CLI_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hiddenfleet/board.h"
#include "hiddenfleet/error.h"

namespace hiddenfleet {

inline constexpr const char* kConfigEnvVar = "HIDDENFLEET_CONFIG";
inline constexpr const char* kArtifactVersion = "0.1.0";

// Exit codes of Dispatch().
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitGuard = 3,
  kExitNotConverged = 4,
  kExitPolicy = 5,
  kExitDistribution = 6,
  kExitIo = 7,
  kExitOther = 8,
};

int ExitCodeFor(ErrorKind kind);

struct ExperimentConfig {
  // Fully resolved document (defaults filled in); this is what the manifest
  // stores and replays.
  nlohmann::json data;
  BoardConfig board;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output_dir;
};

// The documented defaults.
nlohmann::json DefaultConfigJson();

// Merges `user` over the defaults, rejecting unknown keys and ill-typed
// values with kConfigError naming the key path.
ExperimentConfig ParseConfig(const nlohmann::json& user);

// An empty (or whitespace-only) file is the all-defaults config.
ExperimentConfig LoadConfig(const std::string& path);

// Applies "a.b.c=value" (value parsed as JSON, else taken as a string).
void ApplyOverride(nlohmann::json& user, const std::string& assignment);

// Entry point of the hiddenfleet executable.
int Dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hiddenfleet

#endif  // HIDDENFLEET_CLI_H_
