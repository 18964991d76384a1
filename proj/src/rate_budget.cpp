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

#include "spinphoton/rate_budget.hpp"

#include <cmath>

#include "spinphoton/errors.hpp"

namespace spinphoton {
namespace {

void check_efficiency(double v, const std::string& name) {
  if (!(v > 0.0 && v <= 1.0)) throw ValidationError(name + " must be in (0, 1]");
}

void check_stage(const EfficiencyStage& s, double tol) {
  check_efficiency(s.value, "budget." + s.name);
  for (const auto& f : s.factors) check_efficiency(f.value, "budget." + s.name + "." + f.name);
  if (!s.factors.empty() && std::abs(s.product() - s.value) > tol) {
    throw ValidationError("budget." + s.name + " differs from the product of its factors");
  }
}

}  // namespace

double EfficiencyStage::product() const {
  double p = 1.0;
  for (const auto& f : factors) p *= f.value;
  return p;
}

EfficiencyBudget EfficiencyBudget::published() {
  EfficiencyBudget b;
  b.collection = {"collection",
                  0.43,
                  {{"lens_and_window", 0.89},
                   {"excitation_waveplates_and_mirrors", 0.92},
                   {"band_pass_filters", 0.70},
                   {"fiber_coupling", 0.75}}};
  b.tomography = {"tomography",
                  0.69,
                  {{"waveplates_and_pbs", 0.86},
                   {"fiber_transmission", 0.9},
                   {"detector_efficiency", 0.90}}};
  b.demultiplexing = {"demultiplexing",
                      0.18,
                      {{"npbs_1", 0.63}, {"npbs_2", 0.41}, {"fiber_connector", 0.7}}};
  return b;
}

void EfficiencyBudget::validate() const {
  if (!(f_MHz > 0.0)) throw ValidationError("budget.f_MHz must be > 0");
  if (!(measured_rate_MHz >= 0.0)) throw ValidationError("budget.measured_rate_MHz must be >= 0");
  if (!(rounding_tolerance >= 0.0)) throw ValidationError("budget.rounding_tolerance must be >= 0");
  check_stage(collection, rounding_tolerance);
  check_stage(tomography, rounding_tolerance);
  check_stage(demultiplexing, rounding_tolerance);
  check_efficiency(eta_s, "budget.eta_s");
  if (std::abs(eta_s - eta_s_product()) > rounding_tolerance) {
    throw ValidationError("budget.eta_s differs from eta_C eta_T eta_D");
  }
}

double first_lens_brightness(const EfficiencyBudget& b) {
  if (!(b.f_MHz > 0.0) || !(b.eta_s > 0.0)) {
    throw ValidationError("first-lens brightness needs positive f and eta_s");
  }
  return b.measured_rate_MHz / (b.f_MHz * b.eta_s);
}

RateTable rate_table(const EfficiencyBudget& b, double b_fl) {
  if (!(b_fl >= 0.0)) throw ValidationError("B_FL must be >= 0");
  const std::array<double, 3> per_photon = {b_fl, b_fl * b.collection.value,
                                            b_fl * b.collection.value * b.tomography.value};
  RateTable t{};
  for (std::size_t row = 0; row < 3; ++row) {
    for (int n = 1; n <= 3; ++n) {
      t[row][static_cast<std::size_t>(n - 1)] = b.f_MHz * std::pow(per_photon[row], n);
    }
  }
  return t;
}

RateTable rate_table(const EfficiencyBudget& b) { return rate_table(b, first_lens_brightness(b)); }

double round_significant(double x, int digits) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  const double exponent = std::floor(std::log10(std::abs(x))) - (digits - 1);
  const double scale = std::pow(10.0, exponent);
  return std::round(x / scale) * scale;
}

RateTable rounded(const RateTable& t, int digits) {
  RateTable out = t;
  for (auto& row : out) {
    for (double& v : row) v = round_significant(v, digits);
  }
  return out;
}

const RateTable& published_rate_table() {
  static const RateTable t = {{{15.0, 2.8, 0.52}, {6.5, 0.52, 0.041}, {4.5, 0.25, 0.014}}};
  return t;
}

}  // namespace spinphoton
