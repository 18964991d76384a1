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

// Weighted least-squares estimation of (g_e, g_h, theta, sigma_O) from
// correlation curves with a bounded Nelder-Mead simplex.

#include <array>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "spinphoton/correlation_experiment.hpp"
#include "spinphoton/overhauser_mc.hpp"
#include "spinphoton/qd_model.hpp"

namespace spinphoton {

/// Free parameters in this order.
inline constexpr std::array<const char*, 4> kFitParameterNames = {"g_e", "g_h", "theta",
                                                                  "sigma_O_mT"};
using FitVector = std::array<double, 4>;

struct FitBounds {
  FitVector lower = {0.3, 0.0, 0.0, 0.0};
  FitVector upper = {0.9, 0.8, std::numbers::pi / 2, 30.0};
};

struct FitProblem {
  /// Rows in the correlation CSV schema; `stderr_` is the uncertainty.
  std::vector<CurveRow> dataset;
  /// Fixed parameters (T1, B, t12, pulse normalization, ...). The free
  /// entries are overwritten during the fit.
  QDParams base;
  FitBounds bounds;
  FitVector start = {0.6, 0.3, 0.4, 10.5};
  /// Common random numbers: every evaluation reuses this seed.
  MonteCarloConfig mc;
  int max_iterations = 500;
  /// Simplex diameter in bound-scaled coordinates.
  double tolerance = 1e-3;
  /// Initial simplex edge in bound-scaled coordinates.
  double initial_step = 0.1;

  void validate() const;
};

QDParams with_free_parameters(const QDParams& base, const FitVector& x);

/// Simulated values for every dataset row.
std::vector<double> simulate_rows(const QDParams& params, const MonteCarloConfig& mc,
                                  const std::vector<CurveRow>& rows);

/// sum ((sim - data) / uncertainty)^2.
double objective(const FitProblem& problem, const FitVector& x);

struct FitIteration {
  int iteration = 0;
  FitVector best{};
  double objective = 0.0;
  double diameter = 0.0;
};

struct FitResult {
  FitVector params{};
  double objective = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::vector<FitIteration> trace;
};

/// Deterministic given the problem. Returns the best vertex even when the
/// iteration budget runs out (converged = false).
FitResult fit(const FitProblem& problem);

/// Curves simulated at `params` with Gaussian noise of standard deviation
/// `noise` added from `noise_seed`; each row's uncertainty is `noise`.
std::vector<CurveRow> synthetic_dataset(const QDParams& params, const MonteCarloConfig& mc,
                                        const std::vector<double>& t23_grid,
                                        const std::vector<std::string>& quantities, double noise,
                                        std::uint64_t noise_seed);

/// Quantity labels produced by bloch_rows and parity_rows.
std::vector<std::string> all_curve_quantities();

}  // namespace spinphoton
