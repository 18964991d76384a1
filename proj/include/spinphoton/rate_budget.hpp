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

// Setup efficiencies, first-lens brightness and n-photon generation rates.

#include <array>
#include <string>
#include <vector>

namespace spinphoton {

struct EfficiencyFactor {
  std::string name;
  double value = 1.0;
};

/// A composite efficiency with the factors it is built from. The composite
/// is the value quoted for the stage; factors are kept for the product check.
struct EfficiencyStage {
  std::string name;
  double value = 1.0;
  std::vector<EfficiencyFactor> factors;

  double product() const;
};

struct EfficiencyBudget {
  double f_MHz = 81.0;
  /// Unpolarized single-photon rate at the detectors.
  double measured_rate_MHz = 0.8;
  EfficiencyStage collection;      // eta_C
  EfficiencyStage tomography;      // eta_T
  EfficiencyStage demultiplexing;  // eta_D
  /// Quoted system efficiency eta_C eta_T eta_D.
  double eta_s = 0.053;
  /// Allowed gap between a quoted composite and the product of its parts.
  double rounding_tolerance = 0.01;

  /// Loss budget of the three-photon experiment.
  static EfficiencyBudget published();

  /// Every efficiency in (0, 1], rates positive, each composite within
  /// rounding_tolerance of its factor product and eta_s within it of
  /// eta_C eta_T eta_D.
  void validate() const;

  double eta_s_product() const {
    return collection.value * tomography.value * demultiplexing.value;
  }
};

/// B_FL = measured rate / (f eta_s).
double first_lens_brightness(const EfficiencyBudget& b);

/// Rows: first lens f B^n, fiber f (B eta_C)^n, end of tomography
/// f (B eta_C eta_T)^n. Columns n = 1, 2, 3. MHz.
using RateTable = std::array<std::array<double, 3>, 3>;

RateTable rate_table(const EfficiencyBudget& b, double b_fl);
RateTable rate_table(const EfficiencyBudget& b);

/// Rounds to `digits` significant figures.
double round_significant(double x, int digits);

RateTable rounded(const RateTable& t, int digits = 2);

/// Published entanglement-rate table.
const RateTable& published_rate_table();

inline constexpr std::array<const char*, 3> kRateRowNames = {"first_lens", "fiber",
                                                             "tomography_end"};

}  // namespace spinphoton
