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

#include "spinphoton/parameter_fit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace spinphoton {
namespace {

using P = Polarization;

/// Value of one named quantity at grid index g.
double quantity_value(const CorrelationScan& scan, std::size_t g, const std::string& q) {
  static const std::map<std::string, std::pair<P, P>> conditionals = {
      {"P(R2|R3)", {P::R, P::R}}, {"P(R2|L3)", {P::R, P::L}},
      {"P(H2|R3)", {P::H, P::R}}, {"P(H2|L3)", {P::H, P::L}}};
  static const std::map<std::string, std::pair<P, P>> stokes = {
      {"sx_given_R3", {P::H, P::R}}, {"sx_given_L3", {P::H, P::L}},
      {"sy_given_R3", {P::D, P::R}}, {"sy_given_L3", {P::D, P::L}},
      {"sz_given_R3", {P::R, P::R}}, {"sz_given_L3", {P::R, P::L}}};
  if (auto it = conditionals.find(q); it != conditionals.end()) {
    return scan.conditional(g, it->second.first, it->second.second).value;
  }
  if (auto it = stokes.find(q); it != stokes.end()) {
    return 2.0 * scan.conditional(g, it->second.first, it->second.second).value - 1.0;
  }
  throw ValidationError("unknown curve quantity '" + q + "'");
}

double diameter(const std::array<FitVector, 5>& simplex, std::size_t best) {
  double d = 0.0;
  for (const auto& v : simplex) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s = std::max(s, std::abs(v[i] - simplex[best][i]));
    d = std::max(d, s);
  }
  return d;
}

/// Mirrors a scaled coordinate into [0, 1].
double reflect_unit(double u) {
  if (u < 0.0) u = -u;
  if (u > 1.0) u = 2.0 - u;
  return std::clamp(u, 0.0, 1.0);
}

}  // namespace

void FitProblem::validate() const {
  if (dataset.empty()) throw ValidationError("fit dataset is empty");
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!(dataset[i].stderr_ > 0.0)) {
      throw ValidationError("fit dataset row " + std::to_string(i) + " has zero uncertainty");
    }
    if (!(dataset[i].t23_ps > 0.0)) {
      throw ValidationError("fit dataset row " + std::to_string(i) + " has non-positive t23");
    }
  }
  for (int i = 0; i < 4; ++i) {
    if (!(bounds.lower[i] < bounds.upper[i])) {
      throw ValidationError(std::string("fit bounds empty for ") + kFitParameterNames[i]);
    }
    if (!(start[i] >= bounds.lower[i] && start[i] <= bounds.upper[i])) {
      throw ValidationError(std::string("fit start outside bounds for ") + kFitParameterNames[i]);
    }
  }
  if (max_iterations < 1) throw ValidationError("fit.max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw ValidationError("fit.tolerance must be > 0");
  if (!(initial_step > 0.0 && initial_step <= 0.5)) {
    throw ValidationError("fit.initial_step must be in (0, 0.5]");
  }
  base.validate();
  mc.validate();
}

QDParams with_free_parameters(const QDParams& base, const FitVector& x) {
  QDParams p = base;
  p.g_e = x[0];
  p.g_h = x[1];
  p.theta = x[2];
  p.sigma_O_mT = x[3];
  return p;
}

std::vector<double> simulate_rows(const QDParams& params, const MonteCarloConfig& mc,
                                  const std::vector<CurveRow>& rows) {
  std::set<double> times;
  for (const auto& r : rows) times.insert(r.t23_ps);
  const std::vector<double> grid(times.begin(), times.end());
  const CorrelationScan scan(params, mc, grid);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const auto g = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), r.t23_ps) -
                                            grid.begin());
    out.push_back(quantity_value(scan, g, r.quantity));
  }
  return out;
}

double objective(const FitProblem& problem, const FitVector& x) {
  for (const auto& r : problem.dataset) {
    if (!(r.stderr_ > 0.0)) throw ValidationError("fit dataset has a zero-uncertainty row");
  }
  const std::vector<double> sim =
      simulate_rows(with_free_parameters(problem.base, x), problem.mc, problem.dataset);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    const double z = (sim[i] - problem.dataset[i].value) / problem.dataset[i].stderr_;
    chi2 += z * z;
  }
  return chi2;
}

FitResult fit(const FitProblem& problem) {
  problem.validate();
  const FitBounds& b = problem.bounds;
  auto to_params = [&](const FitVector& u) {
    FitVector x;
    for (int i = 0; i < 4; ++i) x[i] = b.lower[i] + std::clamp(u[i], 0.0, 1.0) * (b.upper[i] - b.lower[i]);
    return x;
  };
  FitResult result;
  auto evaluate = [&](const FitVector& u) {
    ++result.evaluations;
    return objective(problem, to_params(u));
  };

  std::array<FitVector, 5> simplex;
  FitVector u0;
  for (int i = 0; i < 4; ++i) u0[i] = (problem.start[i] - b.lower[i]) / (b.upper[i] - b.lower[i]);
  simplex[0] = u0;
  for (int i = 0; i < 4; ++i) {
    simplex[i + 1] = u0;
    // Step inward when the start sits on the upper bound.
    const double step = u0[i] + problem.initial_step <= 1.0 ? problem.initial_step : -problem.initial_step;
    simplex[i + 1][i] = u0[i] + step;
  }
  std::array<double, 5> f;
  for (int i = 0; i < 5; ++i) f[i] = evaluate(simplex[i]);

  auto combine = [](const FitVector& a, const FitVector& c, double t) {
    FitVector out;
    for (int i = 0; i < 4; ++i) out[i] = reflect_unit(a[i] + t * (c[i] - a[i]));
    return out;
  };

  std::array<std::size_t, 5> order;
  for (int it = 1; it <= problem.max_iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return f[a] < f[c]; });
    const std::size_t best = order[0], worst = order[4], second = order[3];
    const double d = diameter(simplex, best);
    result.trace.push_back({it, to_params(simplex[best]), f[best], d});
    result.iterations = it;
    if (d < problem.tolerance) {
      result.converged = true;
      break;
    }
    FitVector centroid{};
    for (std::size_t k = 0; k < 4; ++k) {
      for (int i = 0; i < 4; ++i) centroid[i] += simplex[order[k]][i] / 4.0;
    }
    const FitVector xr = combine(centroid, simplex[worst], -1.0);
    const double fr = evaluate(xr);
    if (fr < f[best]) {
      const FitVector xe = combine(centroid, simplex[worst], -2.0);
      const double fe = evaluate(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        f[worst] = fe;
      } else {
        simplex[worst] = xr;
        f[worst] = fr;
      }
      continue;
    }
    if (fr < f[second]) {
      simplex[worst] = xr;
      f[worst] = fr;
      continue;
    }
    const bool outside = fr < f[worst];
    const FitVector xc = combine(centroid, outside ? xr : simplex[worst], 0.5);
    const double fc = evaluate(xc);
    if (fc < (outside ? fr : f[worst])) {
      simplex[worst] = xc;
      f[worst] = fc;
      continue;
    }
    for (std::size_t k = 1; k < 5; ++k) {
      const std::size_t v = order[k];
      simplex[v] = combine(simplex[best], simplex[v], 0.5);
      f[v] = evaluate(simplex[v]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
  result.params = to_params(simplex[best]);
  result.objective = f[best];
  return result;
}

std::vector<std::string> all_curve_quantities() {
  return {"sx_given_R3", "sx_given_L3", "sy_given_R3", "sy_given_L3", "sz_given_R3", "sz_given_L3",
          "P(R2|R3)",    "P(R2|L3)",    "P(H2|R3)",    "P(H2|L3)"};
}

std::vector<CurveRow> synthetic_dataset(const QDParams& params, const MonteCarloConfig& mc,
                                        const std::vector<double>& t23_grid,
                                        const std::vector<std::string>& quantities, double noise,
                                        std::uint64_t noise_seed) {
  if (!(noise > 0.0)) throw ValidationError("synthetic noise must be > 0");
  const CorrelationScan scan(params, mc, t23_grid);
  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> gauss(0.0, noise);
  std::vector<CurveRow> rows;
  for (std::size_t g = 0; g < t23_grid.size(); ++g) {
    for (const auto& q : quantities) {
      rows.push_back({t23_grid[g], q, quantity_value(scan, g, q) + gauss(rng), noise});
    }
  }
  return rows;
}

}  // namespace spinphoton
