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

#include "spinphoton/overhauser_mc.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "spinphoton/errors.hpp"

namespace spinphoton {
namespace {

class SplitMixStream {
 public:
  explicit SplitMixStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64(state_);
  }

  /// Uniform on (0, 1].
  double uniform_open0() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

}  // namespace

void MonteCarloConfig::validate() const {
  if (n_samples < 1) throw ValidationError("mc.n_samples must be >= 1");
  if (threads < 1) throw ValidationError("mc.threads must be >= 1");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t sample_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(master_seed ^ splitmix64(index + 0x9E3779B97F4A7C15ULL));
}

OverhauserSample sample_field(std::uint64_t master_seed, std::uint64_t index,
                              double sigma_O_mT) {
  if (!(sigma_O_mT >= 0.0)) throw ValidationError("sigma_O must be >= 0");
  OverhauserSample s;
  s.index = index;
  s.seed = sample_seed(master_seed, index);
  SplitMixStream rng(s.seed);
  double z[4];
  for (int k = 0; k < 4; k += 2) {
    const double r = std::sqrt(-2.0 * std::log(rng.uniform_open0()));
    const double a = 2.0 * std::numbers::pi * rng.uniform_open0();
    z[k] = r * std::cos(a);
    z[k + 1] = r * std::sin(a);
  }
  s.b_mT = sigma_O_mT * Eigen::Vector3d(z[0], z[1], z[2]);
  return s;
}

std::pair<double, double> MonteCarloResult::ratio(Eigen::Index a, Eigen::Index b) const {
  const double num = mean(a);
  const double den = mean(a) + mean(b);
  if (!(den > 0.0)) throw NumericalError("ratio with non-positive denominator");
  const double r = num / den;
  const auto n = samples.rows();
  if (n < 2) return {r, 0.0};
  // Linearized per-sample contributions (a_i - r (a_i + b_i)) / den.
  const Eigen::VectorXd lin =
      (samples.col(a) - r * (samples.col(a) + samples.col(b))) / den;
  const double var = (lin.array() - lin.mean()).square().sum() / static_cast<double>(n - 1);
  return {r, std::sqrt(var / static_cast<double>(n))};
}

MonteCarloResult average(const MonteCarloConfig& config, double sigma_O_mT,
                         const SampleFunction& simulation) {
  config.validate();
  const std::size_t n = sigma_O_mT > 0.0 ? config.n_samples : 1;
  std::vector<Eigen::VectorXd> results(n);
  std::vector<std::string> failures(n);

  auto run = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < n; i += stride) {
      try {
        results[i] = simulation(sample_field(config.master_seed, i, sigma_O_mT));
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(config.threads, n));
  if (workers <= 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i].empty()) {
      throw NumericalError("Monte-Carlo sample " + std::to_string(i) + " failed: " +
                           failures[i]);
    }
    if (results[i].size() != results[0].size()) {
      throw NumericalError("Monte-Carlo sample " + std::to_string(i) +
                           " returned a result of inconsistent length");
    }
  }

  MonteCarloResult out;
  const auto m = results[0].size();
  out.samples.resize(static_cast<Eigen::Index>(n), m);
  out.mean = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < n; ++i) {
    out.samples.row(static_cast<Eigen::Index>(i)) = results[i].transpose();
    out.mean += results[i];
  }
  out.mean /= static_cast<double>(n);
  out.stderr_mean = Eigen::VectorXd::Zero(m);
  if (n > 1) {
    for (std::size_t i = 0; i < n; ++i) {
      out.stderr_mean += (results[i] - out.mean).array().square().matrix();
    }
    out.stderr_mean =
        (out.stderr_mean / static_cast<double>(n - 1) / static_cast<double>(n)).cwiseSqrt();
  }
  return out;
}

}  // namespace spinphoton
