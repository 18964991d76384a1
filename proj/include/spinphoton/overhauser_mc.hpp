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

// Static Gaussian Overhauser fields and reproducible Monte-Carlo averaging.
//
// Sample i draws its field from a private stream seeded by
// splitmix64(master_seed ^ splitmix64(i)), so any sample can be regenerated
// independently of how the work is scheduled. Reductions always run in
// sample-index order.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>

#include <Eigen/Dense>

namespace spinphoton {

struct OverhauserSample {
  Eigen::Vector3d b_mT = Eigen::Vector3d::Zero();
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
};

struct MonteCarloConfig {
  std::size_t n_samples = 1000;
  std::uint64_t master_seed = 20240607;
  /// Worker threads for sample evaluation; results do not depend on it.
  unsigned threads = 1;

  void validate() const;
};

/// Stafford's mix13 finalizer with the golden-ratio increment.
std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t sample_seed(std::uint64_t master_seed, std::uint64_t index);

/// Three i.i.d. N(0, sigma_O^2) components via Box-Muller.
OverhauserSample sample_field(std::uint64_t master_seed, std::uint64_t index,
                              double sigma_O_mT);

struct MonteCarloResult {
  Eigen::VectorXd mean;
  /// Standard error of the mean; zero for a single sample.
  Eigen::VectorXd stderr_mean;
  /// One row per sample, in index order.
  Eigen::MatrixXd samples;

  std::size_t n() const { return static_cast<std::size_t>(samples.rows()); }

  /// mean_a / (mean_a + mean_b) with a delta-method standard error that
  /// keeps the per-sample correlation between numerator and denominator.
  std::pair<double, double> ratio(Eigen::Index a, Eigen::Index b) const;
};

using SampleFunction = std::function<Eigen::VectorXd(const OverhauserSample&)>;

/// Evaluates `simulation` on every sample and averages. With sigma_O = 0 a
/// single evaluation is made. A failing sample aborts the run with a
/// NumericalError naming its index.
MonteCarloResult average(const MonteCarloConfig& config, double sigma_O_mT,
                         const SampleFunction& simulation);

}  // namespace spinphoton
