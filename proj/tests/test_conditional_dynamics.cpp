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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "spinphoton/conditional_dynamics.hpp"
#include "spinphoton/errors.hpp"
#include "test_util.hpp"

using namespace spinphoton;
using spinphoton::testing::max_abs;
using Catch::Approx;

namespace {

Matrix4c basis_state(Level l) {
  Matrix4c m = Matrix4c::Zero();
  m(l, l) = 1.0;
  return m;
}

QDParams frozen_spins() {
  QDParams p;
  p.g_e = 0.0;
  p.g_h = 0.0;
  return p;
}

}  // namespace

TEST_CASE("trion population decays exponentially into its ground state") {
  const QDParams p = frozen_spins();
  const Superoperator l = dot_liouvillian(p, Eigen::Vector3d::Zero());
  for (double t : {0.0, 50.0, 200.0, 1000.0}) {
    const Matrix4c rho = apply_superop(propagate(l, t), basis_state(kTrionUp));
    CHECK(rho(kTrionUp, kTrionUp).real() == Approx(std::exp(-t / p.T1_ps)).margin(1e-12));
    CHECK(rho(kUp, kUp).real() == Approx(1.0 - std::exp(-t / p.T1_ps)).margin(1e-12));
  }
}

TEST_CASE("bright propagators count photons of the detected polarization") {
  const QDParams p = frozen_spins();
  const Superoperator l = dot_liouvillian(p, Eigen::Vector3d::Zero());
  const double t = 300.0;
  const double emitted = 1.0 - std::exp(-t / p.T1_ps);
  auto click = [&](Polarization pol, double eta) {
    const Superoperator j = jump_superoperator(PolarizationVector(pol), eta, p.gamma());
    return apply_superop(bright_propagator(l, j, t), basis_state(kTrionUp)).trace().real();
  };
  CHECK(click(Polarization::R, 1.0) == Approx(emitted).margin(1e-12));
  CHECK(click(Polarization::L, 1.0) == Approx(0.0).margin(1e-12));
  CHECK(click(Polarization::H, 1.0) == Approx(emitted / 2).margin(1e-12));
  CHECK(click(Polarization::D, 1.0) == Approx(emitted / 2).margin(1e-12));
  CHECK(click(Polarization::R, 0.25) == Approx(0.25 * emitted).margin(1e-12));
}

TEST_CASE("ground spin precesses at the electron Larmor frequency") {
  QDParams p;
  const Superoperator l = dot_liouvillian(p, Eigen::Vector3d::Zero());
  for (double t : {100.0, 700.0, 1488.5}) {
    const Matrix4c rho = apply_superop(propagate(l, t), basis_state(kUp));
    const double c = std::cos(0.5 * p.electron_splitting() * t);
    CHECK(rho(kUp, kUp).real() == Approx(c * c).margin(1e-10));
  }
}

TEST_CASE("propagation preserves trace and Hermiticity") {
  std::mt19937_64 rng(5);
  const QDParams p;
  const Superoperator l = dot_liouvillian(p, Eigen::Vector3d(3.0, -5.0, 7.0));
  for (int i = 0; i < 10; ++i) {
    const Matrix4c rho = spinphoton::testing::random_density(4, rng);
    const Matrix4c out = apply_superop(propagate(l, 100.0 * i), rho);
    CHECK(std::abs(out.trace() - Complex(1.0)) < 1e-10);
    CHECK(is_hermitian(out, 1e-10));
    CHECK(min_eigenvalue(out) > -1e-10);
  }
}

TEST_CASE("click probabilities scale linearly with the detection efficiency") {
  std::mt19937_64 rng(6);
  const QDParams p;
  const Superoperator l = dot_liouvillian(p, Eigen::Vector3d(1.0, 2.0, -4.0));
  const Matrix4c rho = spinphoton::testing::random_density(4, rng);
  const Superoperator j1 = jump_superoperator(PolarizationVector(Polarization::V), 1.0, p.gamma());
  const Superoperator jh = jump_superoperator(PolarizationVector(Polarization::V), 0.3, p.gamma());
  const double full = apply_superop(bright_propagator(l, j1, 900.0), rho).trace().real();
  const double low = apply_superop(bright_propagator(l, jh, 900.0), rho).trace().real();
  CHECK(low == Approx(0.3 * full).epsilon(1e-9));
}

TEST_CASE("invalid inputs are rejected") {
  const QDParams p;
  const Superoperator l = dot_liouvillian(p, Eigen::Vector3d::Zero());
  CHECK_THROWS_AS(propagate(l, -1.0), ValidationError);
  CHECK_THROWS_AS(jump_superoperator(PolarizationVector(Polarization::R), 0.0, p.gamma()), ValidationError);
  Matrix4c h = Matrix4c::Zero();
  h(0, 1) = 1.0;
  CHECK_THROWS_AS(liouvillian(h, {}), ValidationError);
}

TEST_CASE("final window covers many lifetimes") {
  QDParams p;
  CHECK(final_window_ps(p) == 6000.0);
  p.T1_ps = 1000.0;
  CHECK(final_window_ps(p) == 30000.0);
}
