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

#ifndef HIDDENFLEET_POLICY_H_
#define HIDDENFLEET_POLICY_H_

#include <cstdint>
#include <memory>
#include <string>

#include "hiddenfleet/board.h"

namespace hiddenfleet {

// An attacker. Instances are stateful within an episode: call Reset() at the
// start of each episode and never share one instance across threads. Clone()
// acts as the per-episode factory.
class AttackerPolicy {
 public:
  virtual ~AttackerPolicy() = default;

  virtual void Reset(std::uint64_t seed) = 0;
  // Must return a cell in LegalActions(state). The state carries the full
  // ordered shot log.
  virtual int Act(const PublicState& state) = 0;
  // Deterministic policies emit identical actions for identical histories.
  virtual bool deterministic() const = 0;
  virtual std::unique_ptr<AttackerPolicy> Clone() const = 0;
  virtual std::string id() const = 0;
};

}  // namespace hiddenfleet

#endif  // HIDDENFLEET_POLICY_H_
