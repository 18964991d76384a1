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

#include "spinphoton/errors.hpp"
#include "spinphoton/parameter_fit.hpp"

using namespace spinphoton;
using Catch::Approx;

namespace {

MonteCarloConfig small_mc() {
  MonteCarloConfig mc;
  mc.n_samples = 8;
  mc.master_seed = 5;
  return mc;
}

std::vector<double> coarse_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 16; ++i) g.push_back(400.0 * i);
  return g;
}

/// Exact model rows with a nominal uncertainty.
std::vector<CurveRow> noiseless_rows(const QDParams& p, const MonteCarloConfig& mc) {
  std::vector<CurveRow> rows;
  for (double t : coarse_grid()) {
    for (const char* q : {"sx_given_R3", "sy_given_R3", "sz_given_R3", "sz_given_L3", "P(H2|L3)"}) {
      rows.push_back({t, q, 0.0, 0.02});
    }
  }
  const std::vector<double> values = simulate_rows(p, mc, rows);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].value = values[i];
  return rows;
}

}  // namespace

TEST_CASE("free parameters overwrite only the fitted fields") {
  QDParams base;
  base.T1_ps = 321.0;
  const QDParams p = with_free_parameters(base, {0.5, 0.2, 0.1, 7.0});
  CHECK(p.g_e == 0.5);
  CHECK(p.g_h == 0.2);
  CHECK(p.theta == 0.1);
  CHECK(p.sigma_O_mT == 7.0);
  CHECK(p.T1_ps == 321.0);
}

TEST_CASE("objective vanishes at the generating parameters") {
  FitProblem prob;
  prob.mc = small_mc();
  prob.dataset = noiseless_rows(QDParams{}, prob.mc);
  CHECK(objective(prob, {0.6, 0.3, 0.4, 10.5}) == Approx(0.0).margin(1e-18));
  CHECK(objective(prob, {0.62, 0.3, 0.4, 10.5}) > 1.0);
}

TEST_CASE("simulated rows reject unknown quantities") {
  std::vector<CurveRow> rows = {{100.0, "nonsense", 0.0, 0.1}};
  CHECK_THROWS_AS(simulate_rows(QDParams{}, small_mc(), rows), ValidationError);
}

TEST_CASE("fit recovers parameters from noiseless data") {
  FitProblem prob;
  prob.mc = small_mc();
  prob.dataset = noiseless_rows(QDParams{}, prob.mc);
  prob.start = {0.57, 0.25, 0.5, 9.0};
  const FitResult r = fit(prob);
  CHECK(r.converged);
  CHECK(r.params[0] == Approx(0.6).margin(0.005));
  CHECK(r.params[1] == Approx(0.3).margin(0.05));
  CHECK(r.params[2] == Approx(0.4).margin(0.05));
  CHECK(r.params[3] == Approx(10.5).margin(0.5));
  REQUIRE_FALSE(r.trace.empty());
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].objective <= r.trace[i - 1].objective);
  for (int i = 0; i < 4; ++i) {
    CHECK(r.params[i] >= prob.bounds.lower[i]);
    CHECK(r.params[i] <= prob.bounds.upper[i]);
  }
}

TEST_CASE("fit problem validation") {
  FitProblem prob;
  CHECK_THROWS_AS(prob.validate(), ValidationError);
  prob.dataset = {{100.0, "sx_given_R3", 0.1, 0.0}};
  CHECK_THROWS_AS(prob.validate(), ValidationError);
  prob.dataset[0].stderr_ = 0.1;
  CHECK_NOTHROW(prob.validate());
  prob.start[0] = 2.0;
  CHECK_THROWS_AS(prob.validate(), ValidationError);
}

TEST_CASE("synthetic data is reproducible and noisy around the model") {
  const auto grid = std::vector<double>{500.0, 1500.0};
  const auto a = synthetic_dataset(QDParams{}, small_mc(), grid, {"sz_given_R3"}, 0.02, 3);
  const auto b = synthetic_dataset(QDParams{}, small_mc(), grid, {"sz_given_R3"}, 0.02, 3);
  REQUIRE(a.size() == 2);
  CHECK(a[0].value == b[0].value);
  CHECK(a[0].stderr_ == 0.02);
  CHECK_THROWS_AS(synthetic_dataset(QDParams{}, small_mc(), grid, {"sz_given_R3"}, 0.0, 3), ValidationError);
  CHECK(all_curve_quantities().size() == 10);
}
