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

#include "spinphoton/entanglement_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace spinphoton {
namespace {

constexpr Complex kI(0.0, 1.0);

void check_probability(const Estimate& e, const char* name) {
  if (!(e.value >= 0.0 && e.value <= 1.0)) {
    throw ValidationError(std::string("truth table entry ") + name + " outside [0, 1]");
  }
  if (!(e.stderr_ >= 0.0)) {
    throw ValidationError(std::string("truth table entry ") + name + " has negative error");
  }
}

void check_pair(const Estimate& a, const Estimate& b, const char* name) {
  if (std::abs(a.value + b.value - 1.0) > 0.02) {
    throw ValidationError(std::string("truth table pair ") + name + " does not sum to 1");
  }
}

CMatrix random_density_matrix(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> n01;
  CMatrix g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = Complex(n01(rng), n01(rng));
  }
  CMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

}  // namespace

void TruthTable::validate() const {
  check_probability(v_up, "v_up");
  check_probability(h_up, "h_up");
  check_probability(v_down, "v_down");
  check_probability(h_down, "h_down");
  check_probability(plus_up, "plus_up");
  check_probability(minus_up, "minus_up");
  check_probability(plus_down, "plus_down");
  check_probability(minus_down, "minus_down");
  check_pair(v_up, h_up, "(v_up, h_up)");
  check_pair(v_down, h_down, "(v_down, h_down)");
  check_pair(plus_up, minus_up, "(plus_up, minus_up)");
  check_pair(plus_down, minus_down, "(plus_down, minus_down)");
}

TruthTable TruthTable::measured() {
  TruthTable t;
  t.v_up = {0.87, 0.02};
  t.h_up = {0.13, 0.02};
  t.v_down = {0.04, 0.02};
  t.h_down = {0.96, 0.02};
  t.plus_up = {0.27, 0.02};
  t.minus_up = {0.73, 0.02};
  t.plus_down = {0.73, 0.02};
  t.minus_down = {0.27, 0.02};
  return t;
}

Estimate blinov_bound(const TruthTable& t) {
  t.validate();
  const double up_v = t.v_up.value / 2.0;
  const double down_h = t.h_down.value / 2.0;
  const double up_h = t.h_up.value / 2.0;
  const double down_v = t.v_down.value / 2.0;
  const double parity = 0.5 * (t.minus_up.value + t.plus_down.value - t.plus_up.value -
                               t.minus_down.value);
  const double root = std::sqrt(up_h * down_v);
  Estimate out;
  out.value = 0.5 * (up_v + down_h - 2.0 * root) + 0.5 * parity;

  // d sqrt(bc) / db = sqrt(c/b) / 2; at b = 0 fall back to the one-sided
  // increment sqrt(c * sigma_b).
  auto root_term = [](double x, double y, double sx) {
    if (x > 0.0) return 0.5 * std::sqrt(y / x) * sx;
    return std::sqrt(y * sx);
  };
  const double s_up_h = root_term(up_h, down_v, t.h_up.stderr_ / 2.0);
  const double s_down_v = root_term(down_v, up_h, t.v_down.stderr_ / 2.0);
  double var = std::pow(0.25 * t.v_up.stderr_, 2) + std::pow(0.25 * t.h_down.stderr_, 2) +
               s_up_h * s_up_h + s_down_v * s_down_v;
  for (const Estimate* e : {&t.minus_up, &t.plus_down, &t.plus_up, &t.minus_down}) {
    var += std::pow(0.25 * e->stderr_, 2);
  }
  out.stderr_ = std::sqrt(var);
  return out;
}

double f_s2p(double f_sp, double s_x) {
  if (!(f_sp >= 0.0 && f_sp <= 1.0)) throw ValidationError("f_sp must be in [0, 1]");
  if (!(s_x >= -1.0 && s_x <= 1.0)) throw ValidationError("s_x must be in [-1, 1]");
  return f_sp * (1.0 - s_x) / 2.0;
}

std::string_view to_string(EmissionFamily f) {
  switch (f) {
    case EmissionFamily::kS0: return "S0";
    case EmissionFamily::kS1: return "S1";
    case EmissionFamily::kS2: return "S2";
    case EmissionFamily::kS3: return "S3";
    case EmissionFamily::kNone: return "none";
  }
  return "none";
}

EmissionClass classify_emission_operator(const CMatrix& k, double tol) {
  if (k.rows() != 4 || k.cols() != 2) {
    throw ValidationError("emission operator must be 4x2 (spin -> spin x photon)");
  }
  // Column c holds the image of spin basis state c; entry 2s + ph.
  auto single_entry = [&](Eigen::Index col, Eigen::Index row) {
    for (Eigen::Index r = 0; r < 4; ++r) {
      if (r != row && std::abs(k(r, col)) > tol) return false;
    }
    return std::abs(std::abs(k(row, col)) - 1.0) <= tol;
  };
  auto relative_phase = [&](Eigen::Index r0, Eigen::Index r1) {
    double phi = std::arg(k(r1, 1) / k(r0, 0));
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    return phi;
  };
  if (single_entry(0, 0) && single_entry(1, 3)) {
    return {EmissionFamily::kS0, relative_phase(0, 3)};
  }
  if (single_entry(0, 1) && single_entry(1, 2)) {
    return {EmissionFamily::kS1, relative_phase(1, 2)};
  }
  if (k.norm() <= tol) return {};
  auto rows_zero = [&](Eigen::Index a, Eigen::Index b) {
    return k.row(a).cwiseAbs().maxCoeff() <= tol && k.row(b).cwiseAbs().maxCoeff() <= tol;
  };
  if (rows_zero(1, 3)) return {EmissionFamily::kS2, 0.0};
  if (rows_zero(0, 2)) return {EmissionFamily::kS3, 0.0};
  return {};
}

CMatrix phase_emission_operator(double phi) {
  CMatrix k = CMatrix::Zero(4, 2);
  k(0, 0) = 1.0;
  k(3, 1) = std::exp(kI * phi);
  return k;
}

void PhaseJitterProcess::validate() const {
  if (phases.empty() || phases.size() != weights.size()) {
    throw ValidationError("phase jitter process needs matching, non-empty supports");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("phase jitter weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("phase jitter weights must sum to 1");
}

PhaseJitterProcess PhaseJitterProcess::random(std::uint64_t seed, std::size_t points) {
  if (points == 0) throw ValidationError("phase jitter process needs at least one point");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::exponential_distribution<double> gamma1(1.0);
  PhaseJitterProcess p;
  double total = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    p.phases.push_back(phase(rng));
    p.weights.push_back(gamma1(rng));
    total += p.weights.back();
  }
  for (double& w : p.weights) w /= total;
  return p;
}

CMatrix PhaseJitterProcess::apply(const CMatrix& rho) const {
  validate();
  if (rho.rows() != rho.cols() || rho.rows() % 2 != 0) {
    throw ValidationError("phase jitter process needs a spin (x) rest operator");
  }
  const Eigen::Index rest = rho.rows() / 2;
  const CMatrix id = CMatrix::Identity(rest, rest);
  CMatrix out = CMatrix::Zero(4 * rest, 4 * rest);
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const CMatrix k = kron(phase_emission_operator(phases[i]), id);
    out += weights[i] * k * rho * k.adjoint();
  }
  return out;
}

CVector psi2() {
  CVector v = CVector::Zero(4);
  v(0) = 1.0 / std::numbers::sqrt2;  // |up, R>
  v(3) = 1.0 / std::numbers::sqrt2;  // |down, L>
  return v;
}

BoundCheck verify_bound(const PhaseJitterProcess& process, double f_sp,
                        const std::optional<CMatrix>& rho_e) {
  process.validate();
  if (!(f_sp >= 0.0 && f_sp <= 1.0)) throw ValidationError("f_sp must be in [0, 1]");
  BoundCheck out;
  out.f_sp = f_sp;
  for (std::size_t i = 0; i < process.phases.size(); ++i) {
    out.a_true += process.weights[i] * std::norm(1.0 + std::exp(kI * process.phases[i])) / 4.0;
  }

  // Ideal spin control: |+_s> before photon #2, then an X-basis readout. A
  // quarter precession maps |-_s> at t2 onto up at t3.
  const double s2 = std::numbers::sqrt2;
  CVector plus(2), minus(2), h(2), v(2);
  plus << 1.0 / s2, 1.0 / s2;
  minus << 1.0 / s2, -1.0 / s2;
  h << 1.0 / s2, 1.0 / s2;  // detected ket of H in the {R, L} basis
  v << -kI / s2, kI / s2;   // detected ket of V
  const CMatrix emitted = process.apply(plus * plus.adjoint());
  auto conditional = [&](const CVector& spin, const CVector& photon) {
    const CVector joint = kron(spin, photon);
    const CMatrix spin_proj = kron(CMatrix(spin * spin.adjoint()), CMatrix::Identity(2, 2));
    const double num = (joint.adjoint() * emitted * joint)(0, 0).real();
    const double den = (emitted * spin_proj).trace().real();
    return num / den;
  };
  out.p_v_up = conditional(minus, v);
  out.p_h_down = conditional(plus, h);
  out.s_x = std::clamp(conditional(minus, h) - out.p_v_up, -1.0, 1.0);
  out.p_prime = (1.0 - out.s_x) / 2.0;
  out.f_s2p = f_s2p(f_sp, out.s_x);

  const CMatrix target2 = projector(psi2());
  const CMatrix other = rho_e.value_or(CMatrix(CMatrix::Identity(4, 4) / 4.0));
  check_density_matrix(other);
  const CMatrix rho_sp = f_sp * target2 + (1.0 - f_sp) * other;
  const CVector psi3 = kron(phase_emission_operator(0.0), CMatrix::Identity(2, 2)) * psi2();
  out.f_three_partite = (psi3.adjoint() * process.apply(rho_sp) * psi3)(0, 0).real();

  constexpr double tol = 1e-12;
  out.holds = out.p_prime <= out.a_true + tol && out.p_v_up <= out.a_true + tol &&
              out.p_h_down <= out.a_true + tol && out.f_s2p <= out.f_three_partite + tol;
  return out;
}

std::vector<BoundCheck> verify_bound_suite(std::uint64_t seed, std::size_t count) {
  std::vector<BoundCheck> checks;
  checks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * (i + 1));
    const std::size_t points = 1 + rng() % 8;
    const PhaseJitterProcess process = PhaseJitterProcess::random(rng(), points);
    const double f_sp = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    checks.push_back(verify_bound(process, f_sp, random_density_matrix(rng, 4)));
  }
  return checks;
}

}  // namespace spinphoton
