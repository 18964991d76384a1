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
#include <stdexcept>

#include "spinphoton/errors.hpp"
#include "spinphoton/overhauser_mc.hpp"

using namespace spinphoton;
using Catch::Approx;

TEST_CASE("field samples are deterministic per (seed, index)") {
  const OverhauserSample a = sample_field(7, 3, 10.5);
  const OverhauserSample b = sample_field(7, 3, 10.5);
  CHECK(a.b_mT == b.b_mT);
  CHECK(a.index == 3);
  CHECK(sample_field(7, 4, 10.5).b_mT != a.b_mT);
  CHECK(sample_field(8, 3, 10.5).b_mT != a.b_mT);
  CHECK(sample_field(7, 3, 0.0).b_mT.isZero());
  CHECK_THROWS_AS(sample_field(7, 3, -1.0), ValidationError);
  CHECK(splitmix64(0) != splitmix64(1));
  CHECK(sample_seed(1, 0) != sample_seed(1, 1));
}

TEST_CASE("field components are Gaussian with the configured width") {
  const double sigma = 10.5;
  const int n = 40000;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Vector3d sq = Eigen::Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d b = sample_field(11, static_cast<std::uint64_t>(i), sigma).b_mT;
    sum += b;
    sq += b.cwiseProduct(b);
  }
  for (int k = 0; k < 3; ++k) {
    const double mean = sum(k) / n;
    const double sd = std::sqrt(sq(k) / n - mean * mean);
    CHECK(std::abs(mean) < 5.0 * sigma / std::sqrt(n));
    CHECK(sd == Approx(sigma).epsilon(0.02));
  }
}

TEST_CASE("average reports mean and standard error of the samples") {
  MonteCarloConfig mc;
  mc.n_samples = 4;
  int calls = 0;
  const MonteCarloResult r = average(mc, 1.0, [&](const OverhauserSample& s) {
    ++calls;
    Eigen::VectorXd v(1);
    v(0) = static_cast<double>(s.index);
    return v;
  });
  CHECK(calls == 4);
  CHECK(r.n() == 4);
  CHECK(r.mean(0) == Approx(1.5));
  // Sample sd of {0,1,2,3} is sqrt(5/3).
  CHECK(r.stderr_mean(0) == Approx(std::sqrt(5.0 / 3.0) / 2.0));
}

TEST_CASE("zero field width evaluates a single sample") {
  MonteCarloConfig mc;
  mc.n_samples = 100;
  int calls = 0;
  const MonteCarloResult r = average(mc, 0.0, [&](const OverhauserSample&) {
    ++calls;
    return Eigen::VectorXd::Ones(2);
  });
  CHECK(calls == 1);
  CHECK(r.stderr_mean.isZero());
}

TEST_CASE("thread count does not change results") {
  MonteCarloConfig mc;
  mc.n_samples = 64;
  auto fn = [](const OverhauserSample& s) {
    Eigen::VectorXd v(2);
    v << s.b_mT.norm(), std::sin(s.b_mT(0));
    return v;
  };
  const MonteCarloResult one = average(mc, 5.0, fn);
  mc.threads = 4;
  const MonteCarloResult four = average(mc, 5.0, fn);
  CHECK(one.samples == four.samples);
  CHECK(one.mean == four.mean);
}

TEST_CASE("ratio keeps numerator-denominator correlation") {
  MonteCarloConfig mc;
  mc.n_samples = 50;
  // a and b proportional per sample: the ratio has no spread.
  const MonteCarloResult r = average(mc, 3.0, [](const OverhauserSample& s) {
    Eigen::VectorXd v(2);
    const double w = 1.0 + std::abs(s.b_mT(0));
    v << 0.25 * w, 0.75 * w;
    return v;
  });
  const auto [value, err] = r.ratio(0, 1);
  CHECK(value == Approx(0.25));
  CHECK(err == Approx(0.0).margin(1e-12));
}

TEST_CASE("failures name the sample and invalid configs are rejected") {
  MonteCarloConfig mc;
  mc.n_samples = 10;
  CHECK_THROWS_WITH(average(mc, 1.0,
                            [](const OverhauserSample& s) -> Eigen::VectorXd {
                              if (s.index == 6) throw std::runtime_error("boom");
                              return Eigen::VectorXd::Zero(1);
                            }),
                    Catch::Matchers::ContainsSubstring("sample 6"));
  mc.n_samples = 0;
  CHECK_THROWS_AS(mc.validate(), ValidationError);
}
