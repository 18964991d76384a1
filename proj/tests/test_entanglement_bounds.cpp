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

#include "spinphoton/entanglement_bounds.hpp"
#include "spinphoton/errors.hpp"

using namespace spinphoton;
using Catch::Approx;

namespace {

TruthTable uniform_table(double v) {
  TruthTable t;
  t.v_up = t.h_up = t.v_down = t.h_down = {v, 0.0};
  t.plus_up = t.minus_up = t.plus_down = t.minus_down = {v, 0.0};
  return t;
}

}  // namespace

TEST_CASE("Blinov bound on the measured tables") {
  // 0.87/4 + 0.96/4 - sqrt(0.13 * 0.04)/2 + (0.73 + 0.73 - 0.27 - 0.27)/4
  const double expected = 0.87 / 4 + 0.96 / 4 - std::sqrt(0.13 * 0.04) / 2 + 0.92 / 4;
  const Estimate f = blinov_bound(TruthTable::measured());
  CHECK(f.value == Approx(expected).epsilon(1e-12));
  CHECK(f.value == Approx(0.6514).margin(1e-4));
  CHECK(f.stderr_ > 0.0);
}

TEST_CASE("Blinov bound on perfect and uninformative tables") {
  TruthTable perfect = uniform_table(0.0);
  perfect.v_up = perfect.h_down = perfect.minus_up = perfect.plus_down = {1.0, 0.0};
  CHECK(blinov_bound(perfect).value == Approx(1.0));
  CHECK(blinov_bound(uniform_table(0.5)).value == Approx(0.0).margin(1e-12));
}

TEST_CASE("table validation") {
  TruthTable t = TruthTable::measured();
  CHECK_NOTHROW(t.validate());
  t.v_up.value = 1.2;
  CHECK_THROWS_AS(t.validate(), ValidationError);
  t = TruthTable::measured();
  t.h_up.value = 0.5;
  CHECK_THROWS_AS(t.validate(), ValidationError);
}

TEST_CASE("spin-two-photon fidelity formula") {
  CHECK(f_s2p(0.651, -0.915) == Approx(0.651 * 1.915 / 2));
  CHECK(f_s2p(1.0, -1.0) == Approx(1.0));
  CHECK_THROWS_AS(f_s2p(1.2, 0.0), ValidationError);
  CHECK_THROWS_AS(f_s2p(0.5, 1.5), ValidationError);
}

TEST_CASE("emission operators are classified by structure") {
  const EmissionClass s0 = classify_emission_operator(phase_emission_operator(0.7));
  CHECK(s0.family == EmissionFamily::kS0);
  CHECK(s0.phase == Approx(0.7));
  CMatrix flip = CMatrix::Zero(4, 2);
  flip(1, 0) = 1.0;
  flip(2, 1) = Complex(0.0, 1.0);
  const EmissionClass s1 = classify_emission_operator(flip);
  CHECK(s1.family == EmissionFamily::kS1);
  CHECK(s1.phase == Approx(std::numbers::pi / 2));
  CMatrix only_r = CMatrix::Zero(4, 2);
  only_r(0, 0) = 0.6;
  only_r(2, 1) = 0.8;
  CHECK(classify_emission_operator(only_r).family == EmissionFamily::kS2);
  CMatrix only_l = CMatrix::Zero(4, 2);
  only_l(1, 0) = 0.3;
  CHECK(classify_emission_operator(only_l).family == EmissionFamily::kS3);
  CHECK(classify_emission_operator(CMatrix::Ones(4, 2)).family == EmissionFamily::kNone);
  CHECK_THROWS_AS(classify_emission_operator(CMatrix::Zero(2, 2)), ValidationError);
  CHECK(to_string(EmissionFamily::kS2) == "S2");
}

TEST_CASE("jitter-free process saturates the bound") {
  const PhaseJitterProcess p{{0.0}, {1.0}};
  const BoundCheck c = verify_bound(p);
  CHECK(c.a_true == Approx(1.0));
  CHECK(c.f_three_partite == Approx(1.0));
  CHECK(c.holds);
}

TEST_CASE("two opposite phases halve the coherence") {
  const PhaseJitterProcess p{{0.0, std::numbers::pi}, {0.5, 0.5}};
  const BoundCheck c = verify_bound(p, 0.8);
  CHECK(c.a_true == Approx(0.5));
  CHECK(c.p_prime <= c.a_true + 1e-12);
  CHECK(c.f_s2p <= c.f_three_partite + 1e-12);
  CHECK(c.holds);
}

TEST_CASE("jitter process validation") {
  CHECK_THROWS_AS((PhaseJitterProcess{{0.0}, {0.5}}.validate()), ValidationError);
  CHECK_THROWS_AS((PhaseJitterProcess{{}, {}}.validate()), ValidationError);
  const PhaseJitterProcess r = PhaseJitterProcess::random(3, 5);
  CHECK_NOTHROW(r.validate());
  CHECK(r.phases.size() == 5);
}

TEST_CASE("bound holds on random processes") {
  const auto suite = verify_bound_suite(42, 50);
  REQUIRE(suite.size() == 50);
  for (const auto& c : suite) CHECK(c.holds);
}

TEST_CASE("spin-photon target is normalized") {
  const CVector psi = psi2();
  REQUIRE(psi.size() == 4);
  CHECK(psi.norm() == Approx(1.0));
  CHECK(std::abs(psi(0)) == Approx(1.0 / std::numbers::sqrt2));
  CHECK(std::abs(psi(3)) == Approx(1.0 / std::numbers::sqrt2));
}
