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

#include "hiddenfleet/error.h"

namespace hiddenfleet {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kGuardExceeded: return "GuardExceeded";
    case ErrorKind::kIllegalAction: return "IllegalAction";
    case ErrorKind::kInconsistentState: return "InconsistentState";
    case ErrorKind::kPolicyViolation: return "PolicyViolation";
    case ErrorKind::kEmptySupport: return "EmptySupport";
    case ErrorKind::kWeightMismatch: return "WeightMismatch";
    case ErrorKind::kParticleDepletion: return "ParticleDepletion";
    case ErrorKind::kZeroPosterior: return "ZeroPosterior";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kNotConverged: return "NotConverged";
    case ErrorKind::kGammaOutOfRange: return "GammaOutOfRange";
    case ErrorKind::kPolicyMismatch: return "PolicyMismatch";
    case ErrorKind::kBadDelta: return "BadDelta";
    case ErrorKind::kConfigError: return "ConfigError";
    case ErrorKind::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace hiddenfleet
