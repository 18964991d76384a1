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

#include "spinphoton/qd_model.hpp"

#include <cmath>
#include <numbers>

namespace spinphoton {
namespace {

constexpr Complex kI(0.0, 1.0);

Matrix4c unit(Eigen::Index i, Eigen::Index j) {
  Matrix4c m = Matrix4c::Zero();
  m(i, j) = 1.0;
  return m;
}

void require(bool ok, const char* what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace

void QDParams::validate() const {
  require(std::isfinite(g_e) && std::isfinite(g_h), "qd.g_e/g_h must be finite");
  require(T1_ps > 0.0, "qd.T1_ps must be > 0");
  require(B_mT >= 0.0, "qd.B_mT must be >= 0");
  require(sigma_O_mT >= 0.0, "qd.sigma_O_mT must be >= 0");
  require(eta > 0.0 && eta <= 1.0, "qd.eta must be in (0, 1]");
  require(t12_ps > 0.0, "qd.t12_ps must be > 0");
  require(t23_ps > 0.0, "qd.t23_ps must be > 0");
  require(f_MHz > 0.0, "qd.f_MHz must be > 0");
  require(std::isfinite(theta), "qd.theta must be finite");
}

double QDParams::larmor_period_ps() const {
  const double w = electron_splitting();
  if (w == 0.0) throw ValidationError("Larmor period undefined at zero splitting");
  return 2.0 * std::numbers::pi / std::abs(w);
}

std::string_view to_string(Polarization p) {
  switch (p) {
    case Polarization::R: return "R";
    case Polarization::L: return "L";
    case Polarization::H: return "H";
    case Polarization::V: return "V";
    case Polarization::D: return "D";
    case Polarization::A: return "A";
  }
  return "?";
}

Polarization parse_polarization(std::string_view s) {
  if (s == "R") return Polarization::R;
  if (s == "L") return Polarization::L;
  if (s == "H") return Polarization::H;
  if (s == "V") return Polarization::V;
  if (s == "D") return Polarization::D;
  if (s == "A") return Polarization::A;
  throw ValidationError("unknown polarization label '" + std::string(s) + "'");
}

Polarization orthogonal(Polarization p) {
  switch (p) {
    case Polarization::R: return Polarization::L;
    case Polarization::L: return Polarization::R;
    case Polarization::H: return Polarization::V;
    case Polarization::V: return Polarization::H;
    case Polarization::D: return Polarization::A;
    case Polarization::A: return Polarization::D;
  }
  return p;
}

PolarizationVector::PolarizationVector(Complex c_r, Complex c_l)
    : c_r_(c_r), c_l_(c_l) {
  const double n = std::norm(c_r) + std::norm(c_l);
  if (std::abs(n - 1.0) > 1e-9) {
    throw ValidationError("polarization vector is not unit norm");
  }
}

PolarizationVector PolarizationVector::from_angles(double theta_p, double phi_p) {
  // sigma_H = (sigma_R + sigma_L)/sqrt2, sigma_V = (i sigma_R - i sigma_L)/sqrt2.
  const double s2 = std::numbers::sqrt2;
  const Complex ch = std::cos(theta_p);
  const Complex cv = std::exp(kI * phi_p) * std::sin(theta_p);
  return {(ch + kI * cv) / s2, (ch - kI * cv) / s2};
}

PolarizationVector::PolarizationVector(Polarization label) : c_r_(0.0), c_l_(0.0) {
  constexpr double pi = std::numbers::pi;
  PolarizationVector v(1.0, 0.0);
  switch (label) {
    case Polarization::R: v = PolarizationVector(1.0, 0.0); break;
    case Polarization::L: v = PolarizationVector(0.0, 1.0); break;
    case Polarization::H: v = from_angles(0.0, 0.0); break;
    case Polarization::V: v = from_angles(pi / 2, 0.0); break;
    case Polarization::D: v = from_angles(pi / 4, 0.0); break;
    case Polarization::A: v = from_angles(pi / 4, pi); break;
  }
  c_r_ = v.c_r_;
  c_l_ = v.c_l_;
}

Matrix4c sigma_r() { return unit(kUp, kTrionUp); }
Matrix4c sigma_l() { return unit(kDown, kTrionDown); }

Matrix4c electron_pauli(int i) {
  Matrix4c m = Matrix4c::Zero();
  m.topLeftCorner<2, 2>() = paulis().at(static_cast<std::size_t>(i));
  return m;
}

Matrix4c spin_hamiltonian(const QDParams& p, const Eigen::Vector3d& b_overhauser_mT) {
  const Matrix4c sy_e = kI * (unit(kDown, kUp) - unit(kUp, kDown));
  const Matrix4c sy_h = kI * (unit(kTrionDown, kTrionUp) - unit(kTrionUp, kTrionDown));
  Matrix4c h = 0.5 * p.electron_splitting() * sy_e + 0.5 * p.hole_splitting() * sy_h;
  const double overhauser = 0.5 * p.g_e * kMuBOverHbar * 1e-3;
  for (int axis = 0; axis < 3; ++axis) {
    h += overhauser * b_overhauser_mT(axis) * electron_pauli(axis + 1);
  }
  return h;
}

std::vector<Matrix4c> collapse_operators(const QDParams& p) {
  if (!(p.T1_ps > 0.0)) throw ValidationError("qd.T1_ps must be > 0");
  const double amp = std::sqrt(p.gamma());
  return {amp * sigma_r(), amp * sigma_l()};
}

Matrix4c polarization_lowering(const PolarizationVector& pol) {
  return pol.r() * sigma_r() + pol.l() * sigma_l();
}

Matrix4c pulse_unitary(double theta, bool normalized) {
  const double s2 = std::numbers::sqrt2;
  const Matrix4c sh = (sigma_l() + sigma_r()) / s2;
  const Matrix4c sv = -kI * (sigma_l() - sigma_r()) / s2;
  const Matrix4c sy_h = -kI * (sh - sh.adjoint());
  const Matrix4c sy_v = -kI * (sv - sv.adjoint());
  const double prefactor = 0.5 * std::numbers::pi * (normalized ? s2 : 1.0);
  const CMatrix gen = -kI * prefactor * (std::cos(theta) * sy_h + std::sin(theta) * sy_v);
  return expm(gen);
}

Superoperator pulse_superoperator(double theta, bool normalized) {
  const Matrix4c r = pulse_unitary(theta, normalized);
  return sandwich_superop(r, r);
}

}  // namespace spinphoton
