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

// Measurement-based fidelity lower bounds for the spin-photon and
// spin-photon-photon states, and a numerical check of the phase-jitter
// argument behind the three-partite bound.
//
// Conventions: spin |0_s> = up, |1_s> = down; photon |0_ph> = R, |1_ph> = L.
// Joint kets are indexed 2 * spin + photon.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "spinphoton/operator_core.hpp"

namespace spinphoton {

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Conditional polarization probabilities of photon #2 given the spin
/// readout at t3. The linear entries are taken at t23 = t12, the circular
/// entries at t23 = 2 t12.
struct TruthTable {
  Estimate v_up;        // P(V2 | up)
  Estimate h_up;        // P(H2 | up)
  Estimate v_down;      // P(V2 | down)
  Estimate h_down;      // P(H2 | down)
  Estimate plus_up;     // P(sigma+_2 | up)
  Estimate minus_up;    // P(sigma-_2 | up)
  Estimate plus_down;   // P(sigma+_2 | down)
  Estimate minus_down;  // P(sigma-_2 | down)

  /// Entries in [0, 1] and each conditional pair summing to 1 +- 0.02.
  void validate() const;

  /// Measured values of the three-photon experiment, +-0.02 each.
  static TruthTable measured();
};

/// F = (rho_upV + rho_downH - 2 sqrt(rho_upH rho_downV)) / 2 + Pi / 2 with
/// joint probabilities rho = conditional / 2 and
/// Pi = [P(s-|up) + P(s+|down) - P(s+|up) - P(s-|down)] / 2.
/// The standard error is propagated linearly from the entries.
Estimate blinov_bound(const TruthTable& t);

/// F_sp (1 - s_x) / 2.
double f_s2p(double f_sp, double s_x);

enum class EmissionFamily { kS0, kS1, kS2, kS3, kNone };

std::string_view to_string(EmissionFamily f);

struct EmissionClass {
  EmissionFamily family = EmissionFamily::kNone;
  /// Relative phase for S0 and S1, zero otherwise.
  double phase = 0.0;
};

/// Structural match of a 4x2 emission operator (spin -> spin (x) photon).
EmissionClass classify_emission_operator(const CMatrix& k, double tol = 1e-9);

/// K_phi = |0_s 0_ph><0_s| + e^{i phi} |1_s 1_ph><1_s|, as a 4x2 matrix.
CMatrix phase_emission_operator(double phi);

/// Discrete phase distribution p(phi).
struct PhaseJitterProcess {
  std::vector<double> phases;
  std::vector<double> weights;

  void validate() const;

  /// Random support of `points` phases with Dirichlet-like weights.
  static PhaseJitterProcess random(std::uint64_t seed, std::size_t points);

  /// C(rho) = sum_k w_k K_phik rho K_phik^dag on a spin (x) rest operator, with
  /// the spin as the most significant factor and the new photon inserted
  /// right after it.
  CMatrix apply(const CMatrix& rho) const;
};

struct BoundCheck {
  double a_true = 0.0;           // sum p |1 + e^{i phi}|^2 / 4
  double p_v_up = 0.0;           // simulated P(V2 | up)
  double p_h_down = 0.0;         // simulated P(H2 | down)
  double s_x = 0.0;              // photon #2 H/V projection given up
  double p_prime = 0.0;          // (1 - s_x) / 2
  double f_sp = 0.0;             // spin-photon fidelity lower bound fed in
  double f_s2p = 0.0;            // f_sp (1 - s_x) / 2
  double f_three_partite = 0.0;  // <psi3| C(rho_sp) |psi3>
  bool holds = false;
};

/// Simulates the perfect-spin-control measurement of photon #2 for the
/// process and checks P' <= A and F_s2p <= <psi3|C(rho_sp)|psi3>, where
/// rho_sp = f_sp |psi2><psi2| + (1 - f_sp) rho_e. rho_e defaults to the
/// maximally mixed two-qubit state.
BoundCheck verify_bound(const PhaseJitterProcess& process, double f_sp = 1.0,
                        const std::optional<CMatrix>& rho_e = std::nullopt);

/// Runs verify_bound on `count` random processes, each with a random f_sp
/// and random rho_e derived from `seed`.
std::vector<BoundCheck> verify_bound_suite(std::uint64_t seed, std::size_t count);

/// Spin-photon target (|up,R> + |down,L>)/sqrt2.
CVector psi2();

}  // namespace spinphoton
