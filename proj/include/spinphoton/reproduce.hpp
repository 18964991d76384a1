// Copyright 2026 The spinphoton Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Reproduction of the published numbers and the pass/fail criteria used
// by both `reproduce-all` and the acceptance test binary.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace spinphoton {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  /// One-line summary of measured versus expected values.
  std::string detail;
  /// Additional lines (variants, diagnostics).
  std::vector<std::string> notes;
  double seconds = 0.0;
  double time_limit_seconds = 0.0;
};

struct ReproduceOptions {
  std::uint64_t seed = 20240607;
  /// Overhauser samples for the Monte-Carlo criteria (at least 1000).
  std::size_t samples = 1000;
  unsigned threads = 1;
};

inline constexpr int kCriterionCount = 11;

/// Evaluates one criterion (1..11). Throws ValidationError for other ids.
CriterionResult run_criterion(int id, const ReproduceOptions& options);

/// "PASS [3] Blinov bound: ... (0.01 s)".
std::string format_result(const CriterionResult& r);

}  // namespace spinphoton
