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

// Four-level charged quantum dot: Hamiltonians, collapse operators,
// polarization-resolved lowering operators and instantaneous pulses.
//
// Units: time in ps, fields in mT, angular frequencies in rad/ps.

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "spinphoton/operator_core.hpp"

namespace spinphoton {

/// Bohr magneton over reduced Planck constant, rad ps^-1 T^-1.
inline constexpr double kMuBOverHbar = 8.794e-2;

enum Level : Eigen::Index { kUp = 0, kDown = 1, kTrionUp = 2, kTrionDown = 3 };

struct QDParams {
  double g_e = 0.60;
  double g_h = 0.3;
  double B_mT = 40.0;
  double sigma_O_mT = 10.5;
  double T1_ps = 200.0;
  double theta = 0.4;
  double eta = 1.0;
  double t12_ps = 810.0;
  double t23_ps = 810.0;
  double f_MHz = 81.0;
  /// false: exponent prefactor pi/2 exactly as in the pulse formula.
  /// true: prefactor scaled by sqrt(2) so each circular transition is fully
  /// inverted.
  bool normalized_pulse = false;

  /// Throws ValidationError naming the offending field.
  void validate() const;

  double gamma() const { return 1.0 / T1_ps; }
  /// Electron Zeeman splitting g_e mu_B B / hbar.
  double electron_splitting() const { return g_e * kMuBOverHbar * B_mT * 1e-3; }
  double hole_splitting() const { return g_h * kMuBOverHbar * B_mT * 1e-3; }
  double larmor_period_ps() const;
  double rep_period_ps() const { return 1e6 / f_MHz; }
};

enum class Polarization { R, L, H, V, D, A };

std::string_view to_string(Polarization p);
/// Parses one of "R", "L", "H", "V", "D", "A".
Polarization parse_polarization(std::string_view s);
Polarization orthogonal(Polarization p);

/// Unit Jones vector in the {R, L} basis, stored as the coefficients of the
/// detected-mode lowering operator: sigma_p = c_R sigma_R + c_L sigma_L.
/// With sigma_H = (sigma_L + sigma_R)/sqrt2 and
/// sigma_V = -i (sigma_L - sigma_R)/sqrt2 the labels are
///   R = (1, 0), L = (0, 1), H = (1, 1)/sqrt2, V = (i, -i)/sqrt2,
///   D = (H + V)/sqrt2, A = (H - V)/sqrt2.
class PolarizationVector {
 public:
  PolarizationVector(Complex c_r, Complex c_l);
  explicit PolarizationVector(Polarization label);

  /// sigma_p = cos(theta_p) sigma_H + e^{i phi_p} sin(theta_p) sigma_V.
  static PolarizationVector from_angles(double theta_p, double phi_p);

  Complex r() const { return c_r_; }
  Complex l() const { return c_l_; }

 private:
  Complex c_r_;
  Complex c_l_;
};

/// sigma_R = |up><T_up|, sigma_L = |down><T_down|.
Matrix4c sigma_r();
Matrix4c sigma_l();

/// Electron Pauli operator {I, X, Y, Z}[i] on the ground manifold, zero on
/// the trion block.
Matrix4c electron_pauli(int i);

/// (Delta_e/2) sigma_y^e + (Delta_h/2) sigma_y^h + (1/2) g_e mu_B B_O . sigma^e.
Matrix4c spin_hamiltonian(const QDParams& p, const Eigen::Vector3d& b_overhauser_mT);

/// {A_R, A_L} = sqrt(gamma) {sigma_R, sigma_L}.
std::vector<Matrix4c> collapse_operators(const QDParams& p);

/// c_R sigma_R + c_L sigma_L.
Matrix4c polarization_lowering(const PolarizationVector& pol);

/// R_theta = exp(-i s (cos theta sigma_{y,H} + sin theta sigma_{y,V})) with
/// s = pi/2, or pi/sqrt2 when normalized.
Matrix4c pulse_unitary(double theta, bool normalized);
Superoperator pulse_superoperator(double theta, bool normalized);

}  // namespace spinphoton
