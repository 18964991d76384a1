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

// One-step emission-plus-precession process map extracted from spin-photon
// correlations, its two-qubit completion, and k-step cluster fidelities.
//
// Spin basis {up, down}; photon basis {R, L} with sigma_z = R - L,
// sigma_x = H - V, sigma_y = D - A. Spin (x) photon kets are indexed
// 2 * spin + photon. Operators are column-stacked.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "spinphoton/entanglement_bounds.hpp"
#include "spinphoton/overhauser_mc.hpp"
#include "spinphoton/qd_model.hpp"

namespace spinphoton {

using Map16x4 = Eigen::Matrix<Complex, 16, 4>;
using Matrix4d = Eigen::Matrix4d;

/// Input spin states of the tomography, in this order.
enum class InitialSpin { kDown = 0, kUp = 1, kPlus = 2, kPlusI = 3 };
inline constexpr std::array<InitialSpin, 4> kTomographyInputs = {
    InitialSpin::kDown, InitialSpin::kUp, InitialSpin::kPlus, InitialSpin::kPlusI};

Eigen::Vector2cd spin_ket(InitialSpin s);

struct ProcessMap {
  /// vec(2x2 spin operator) -> vec(4x4 spin (x) photon operator).
  Map16x4 matrix = Map16x4::Zero();
  double condition_time_ps = 0.0;

  Matrix4c apply(const Matrix2c& rho_s) const;
};

struct TwoQubitMap {
  Matrix16c matrix = Matrix16c::Zero();

  Matrix4c apply(const Matrix4c& rho) const;
};

/// Polarization-resolved bright states of one input after one pulse and a
/// window t: the ground block of B_p(t) P rho_in for p in {R, L, H, V, D, A},
/// plus the trion population of K(t) P rho_in that has not yet emitted.
struct EmissionStates {
  std::array<Matrix2c, 6> bright{};
  double unemitted = 0.0;
};

EmissionStates emission_states(const QDParams& params, const Eigen::Vector3d& b_overhauser_mT,
                               InitialSpin input, double t_ps);

/// <sigma_i^(e) sigma_j^(p)>, i, j in {I, x, y, z}, each photon basis
/// normalized by its own two-outcome click probability.
Matrix4d correlations_from_states(const EmissionStates& s);

/// Default tolerance on the unemitted trion fraction at the condition time.
inline constexpr double kUnemittedTolerance = 0.05;

/// Overhauser-averaged correlations for one input state. Throws
/// NumericalError if the averaged unemitted fraction exceeds `tolerance`.
Matrix4d spin_photon_correlations(const QDParams& params, const MonteCarloConfig& mc,
                                  InitialSpin input, double t_ps,
                                  double tolerance = kUnemittedTolerance);

/// rho_sp = (1/4) sum c_ij sigma_i (x) sigma_j.
Matrix4c state_from_correlations(const Matrix4d& c);
Matrix4d correlations_from_state(const Matrix4c& rho_sp);

/// Unique linear map reproducing the four inputs' correlations.
ProcessMap build_process_map(const std::array<Matrix4d, 4>& correlations, double t_ps);

/// Correlations that a map produces for a given input.
Matrix4d correlations_from_map(const ProcessMap& c, InitialSpin input);

/// U K0 rho K0^dag U^dag with K0 = |00><0| + |11><1| and U = exp(-i pi sigma_y / 4)
/// on the spin.
ProcessMap ideal_step_map();

/// D(rho_s (x) X) = C(rho_s) <R|X|R>, extended linearly.
TwoQubitMap to_two_qubit(const ProcessMap& c);

/// Applies C to the spin of a spin (x) n-photon operator; the new photon is
/// placed directly after the spin.
CMatrix apply_step(const ProcessMap& c, const CMatrix& rho, int n_photons);
/// Same step through D with a fresh |R> photon.
CMatrix apply_step(const TwoQubitMap& d, const CMatrix& rho, int n_photons);

struct ChainResult {
  CMatrix rho;
  double fidelity = 0.0;
};

/// rho_k = C_k o ... o C_1(rho_s) and F_k = Tr[rho~_k rho_k], where rho~_k is
/// the ideal chain started from |+>. Throws ValidationError for k outside 1..4.
ChainResult compose_and_fidelity(const ProcessMap& c, int k, const Matrix2c& rho_s);

/// Both composition routes side by side, for checking the D completion.
ChainResult compose_two_qubit(const TwoQubitMap& d, int k, const Matrix2c& rho_s);

/// Max |C(rho^dag) - C(rho)^dag| over random rho.
double hermiticity_residual(const ProcessMap& c, int trials, std::uint64_t seed);
double hermiticity_residual(const TwoQubitMap& d, int trials, std::uint64_t seed);
/// Max |Tr C(rho) - Tr rho| over random unit-trace rho.
double trace_deviation(const ProcessMap& c, int trials, std::uint64_t seed);

enum class ChainStart {
  /// Heralded up at t1, precessed for t12 under the averaged dynamics.
  kPrecessedUp,
  /// Ideal |+>.
  kPlus,
  /// Normalized ground state left by the heralding R detection at t12.
  kHeralded,
};

struct FidelityOptions {
  int k_max = 4;
  ChainStart start = ChainStart::kPrecessedUp;
  /// Compose per sample, then average, instead of averaging the map first.
  bool per_sample = false;
  /// Batches for the batch-means standard error.
  int batches = 10;
};

struct FidelityReport {
  std::vector<Estimate> fidelity;  // k = 1..k_max
  std::vector<double> trace;       // Tr rho_k of the averaged chain
  ProcessMap map;
  Matrix2c rho_s = Matrix2c::Zero();
  double unemitted = 0.0;
};

FidelityReport cluster_fidelities(const QDParams& params, const MonteCarloConfig& mc,
                                  const FidelityOptions& options);

}  // namespace spinphoton
