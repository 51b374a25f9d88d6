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

// Locale-independent number formatting for every emitted file.

#ifndef HIDDENFLEET_FORMAT_H_
#define HIDDENFLEET_FORMAT_H_

#include <charconv>
#include <string>

namespace hiddenfleet {

// Fixed notation with `digits` decimals ("%.6f" without the locale).
inline std::string FormatFixed(double x, int digits = 6) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

// Shortest text that round-trips to the same double.
inline std::string FormatExact(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace hiddenfleet

#endif  // HIDDENFLEET_FORMAT_H_
