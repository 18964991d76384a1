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
#include <numbers>

#include "spinphoton/errors.hpp"
#include "spinphoton/qd_model.hpp"
#include "test_util.hpp"

using namespace spinphoton;
using spinphoton::testing::max_abs;
using Catch::Approx;

TEST_CASE("default parameters validate and give the expected splittings") {
  const QDParams p;
  CHECK_NOTHROW(p.validate());
  // 0.6 * 8.794e-2 rad/(ps T) * 0.04 T
  CHECK(p.electron_splitting() == Approx(2.11056e-3).epsilon(1e-6));
  CHECK(p.hole_splitting() == Approx(1.05528e-3).epsilon(1e-6));
  CHECK(p.larmor_period_ps() == Approx(2.0 * std::numbers::pi / 2.11056e-3).epsilon(1e-6));
  CHECK(p.rep_period_ps() == Approx(12345.679).epsilon(1e-6));
  CHECK(p.gamma() == Approx(1.0 / 200.0));
}

TEST_CASE("invalid parameters are rejected with the field name") {
  QDParams p;
  p.T1_ps = 0.0;
  CHECK_THROWS_WITH(p.validate(), Catch::Matchers::ContainsSubstring("T1_ps"));
  p = QDParams{};
  p.eta = 1.5;
  CHECK_THROWS_WITH(p.validate(), Catch::Matchers::ContainsSubstring("eta"));
  p = QDParams{};
  p.sigma_O_mT = -1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = QDParams{};
  p.g_e = 0.0;
  CHECK_THROWS_AS(p.larmor_period_ps(), ValidationError);
}

TEST_CASE("polarization labels parse, print and pair with their orthogonal") {
  for (auto p : {Polarization::R, Polarization::L, Polarization::H, Polarization::V, Polarization::D,
                 Polarization::A}) {
    CHECK(parse_polarization(to_string(p)) == p);
    CHECK(orthogonal(orthogonal(p)) == p);
    const PolarizationVector a(p);
    const PolarizationVector b(orthogonal(p));
    CHECK(std::abs(std::conj(a.r()) * b.r() + std::conj(a.l()) * b.l()) < 1e-12);
  }
  CHECK_THROWS_AS(parse_polarization("X"), ValidationError);
  CHECK_THROWS_AS(PolarizationVector(1.0, 1.0), ValidationError);
}

TEST_CASE("linear polarizations are equal superpositions of circular ones") {
  for (auto p : {Polarization::H, Polarization::V, Polarization::D, Polarization::A}) {
    const PolarizationVector v(p);
    CHECK(std::norm(v.r()) == Approx(0.5));
    CHECK(std::norm(v.l()) == Approx(0.5));
  }
  // Diagonal and horizontal overlap with probability 1/2.
  const PolarizationVector h(Polarization::H);
  const PolarizationVector d(Polarization::D);
  CHECK(std::norm(std::conj(h.r()) * d.r() + std::conj(h.l()) * d.l()) == Approx(0.5));
}

TEST_CASE("optical transitions connect each spin to its trion") {
  CHECK(std::abs(sigma_r()(kUp, kTrionUp) - 1.0) == 0.0);
  CHECK(std::abs(sigma_l()(kDown, kTrionDown) - 1.0) == 0.0);
  CHECK(max_abs(sigma_r() * sigma_r()) == 0.0);
  const auto c = collapse_operators(QDParams{});
  REQUIRE(c.size() == 2);
  CHECK(max_abs(c[0] - std::sqrt(1.0 / 200.0) * sigma_r()) < 1e-15);
}

TEST_CASE("spin Hamiltonian is Hermitian and splits the ground states by the Zeeman energy") {
  QDParams p;
  const Matrix4c h = spin_hamiltonian(p, Eigen::Vector3d(1.0, -2.0, 3.0));
  CHECK(is_hermitian(h));
  const Matrix4c h0 = spin_hamiltonian(p, Eigen::Vector3d::Zero());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> ground(h0.topLeftCorner<2, 2>());
  CHECK(ground.eigenvalues()(1) - ground.eigenvalues()(0) == Approx(p.electron_splitting()));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> trion(h0.bottomRightCorner<2, 2>());
  CHECK(trion.eigenvalues()(1) - trion.eigenvalues()(0) == Approx(p.hole_splitting()));
}

TEST_CASE("pulse is unitary and only couples spins to trions") {
  for (bool normalized : {false, true}) {
    const Matrix4c u = pulse_unitary(0.4, normalized);
    CHECK(max_abs(u * u.adjoint() - Matrix4c::Identity()) < 1e-12);
    CHECK(std::abs(u(kUp, kDown)) < 1e-12);
    CHECK(std::abs(u(kTrionUp, kTrionDown)) < 1e-12);
  }
  // Excitation amplitude sin(prefactor): prefactor pi/(2 sqrt2) or pi/2.
  CHECK(std::abs(pulse_unitary(0.4, false)(kTrionUp, kUp)) == Approx(std::sin(std::numbers::pi / (2 * std::numbers::sqrt2))));
  CHECK(std::abs(pulse_unitary(0.4, true)(kTrionUp, kUp)) == Approx(1.0));
  CHECK(std::abs(pulse_unitary(1.1, true)(kTrionDown, kDown)) == Approx(1.0));
}

TEST_CASE("pulse superoperator acts as U rho U^dag") {
  std::mt19937_64 rng(4);
  const Matrix4c rho = spinphoton::testing::random_density(4, rng);
  const Matrix4c u = pulse_unitary(0.4, false);
  CHECK(max_abs(apply_superop(pulse_superoperator(0.4, false), rho) - u * rho * u.adjoint()) < 1e-12);
}
