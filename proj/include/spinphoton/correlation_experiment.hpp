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

// Three-pulse protocol: pulse, bright window, pulse, bright window, pulse,
// final bright window. Photon #1 heralds in R; photon #2 is analysed in one
// of six polarizations and photon #3 in R or L.

#include <array>
#include <cstddef>
#include <map>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "spinphoton/conditional_dynamics.hpp"
#include "spinphoton/entanglement_bounds.hpp"
#include "spinphoton/overhauser_mc.hpp"
#include "spinphoton/qd_model.hpp"

namespace spinphoton {

struct PolarizationTriple {
  Polarization p1 = Polarization::R;
  Polarization p2 = Polarization::R;
  Polarization p3 = Polarization::R;

  std::string label() const;
  auto operator<=>(const PolarizationTriple&) const = default;
};

/// The 12 waveplate settings: p1 = R, p2 in {H, V, D, A, R, L}, p3 in {R, L}.
/// Setting index = 2 * (p2 position) + (p3 position).
const std::array<PolarizationTriple, 12>& waveplate_settings();
std::size_t setting_index(Polarization p2, Polarization p3);

struct PulseSequence {
  double t1_ps = 0.0;
  double t12_ps = 810.0;
  double t23_ps = 810.0;
  double theta = 0.4;
  double rep_period_ps = 1e6 / 81.0;

  static PulseSequence from_params(const QDParams& p);
  std::array<double, 3> pulse_times() const { return {t1_ps, t1_ps + t12_ps, t1_ps + t12_ps + t23_ps}; }
  /// Strictly increasing pulses inside one repetition period.
  void validate() const;
};

struct ConditionalState {
  DensityMatrix rho = DensityMatrix::Zero();
  double probability = 0.0;
};

/// Propagators of one dot realization (fixed Overhauser field), with bright
/// propagators cached per (polarization, window length).
class ConditionalSimulator {
 public:
  ConditionalSimulator(const QDParams& params, const Eigen::Vector3d& b_overhauser_mT);

  const QDParams& params() const { return params_; }
  const Superoperator& liouvillian() const { return l_; }
  const Superoperator& pulse() const { return pulse_; }
  Superoperator jump(Polarization p) const;
  const Superoperator& bright(Polarization p, double t_ps) const;

  /// B_p3(t_final) P B_p2(t23) P B_p1(t12) P rho(t1), rho(t1) = I_ground / 2.
  ConditionalState three_pulse(const PolarizationTriple& pols) const;

 private:
  QDParams params_;
  Superoperator l_;
  Superoperator pulse_;
  mutable std::map<std::pair<int, double>, Superoperator> bright_cache_;
};

/// Unnormalized conditional state and its probability for one field sample.
ConditionalState three_pulse_conditional(const QDParams& params, const OverhauserSample& sample,
                                         Polarization p1, Polarization p2, Polarization p3);

struct CoincidenceTable {
  std::vector<PolarizationTriple> settings;
  std::vector<double> probabilities;
  std::vector<double> stderrs;

  /// Probability of a listed triple; throws ValidationError if absent.
  Estimate at(const PolarizationTriple& t) const;
  void validate() const;
};

/// Overhauser-averaged three-photon coincidence probabilities at the
/// params' t12, t23.
CoincidenceTable coincidence_table(const QDParams& params, const MonteCarloConfig& mc,
                                   const std::vector<PolarizationTriple>& settings);

struct NamedRatios {
  std::optional<Estimate> r2_given_r3;
  std::optional<Estimate> r2_given_l3;
  std::optional<Estimate> h2_given_r3;
  std::optional<Estimate> h2_given_l3;
};

/// a / (a + b) with independent-error propagation; empty for a + b <= 0.
std::optional<Estimate> conditional_ratio(const Estimate& a, const Estimate& b);

/// P(R2|R3), P(R2|L3), P(H2|R3), P(H2|L3) from whichever triples the table
/// holds (p1 = R).
NamedRatios conditional_probabilities(const CoincidenceTable& table);

/// Default delay grid: 50 ps to 6.5 ns in 50 ps steps.
std::vector<double> default_t23_grid();

/// The 12 setting probabilities for every t23 on a grid, per Overhauser
/// sample. Window propagators are advanced by cached step exponentials so a
/// grid costs about as much as a handful of matrix exponentials.
class CorrelationScan {
 public:
  CorrelationScan(const QDParams& params, const MonteCarloConfig& mc, std::vector<double> t23_grid);

  const std::vector<double>& grid() const { return grid_; }
  const MonteCarloResult& result() const { return result_; }

  /// Column of setting s at grid index g.
  Eigen::Index column(std::size_t g, std::size_t s) const {
    return static_cast<Eigen::Index>(12 * g + s);
  }
  /// Overhauser-averaged coincidence probability.
  Estimate probability(std::size_t g, Polarization p2, Polarization p3) const;
  /// P(p2 | p3) from the averaged numerators and denominators.
  Estimate conditional(std::size_t g, Polarization p2, Polarization p3) const;

 private:
  QDParams params_;
  std::vector<double> grid_;
  MonteCarloResult result_;
};

/// Per-sample setting probabilities on a grid (12 entries per grid point).
Eigen::VectorXd scan_sample(const QDParams& params, const Eigen::Vector3d& b_overhauser_mT,
                            const std::vector<double>& t23_grid);

struct BlochPoint {
  double t23_ps = 0.0;
  Eigen::Vector3d given_r3 = Eigen::Vector3d::Zero();  // (s_x, s_y, s_z)
  Eigen::Vector3d given_l3 = Eigen::Vector3d::Zero();
  Eigen::Vector3d stderr_r3 = Eigen::Vector3d::Zero();
  Eigen::Vector3d stderr_l3 = Eigen::Vector3d::Zero();
};

/// Stokes vector of photon #2: s_x = H - V, s_y = D - A, s_z = R - L.
std::vector<BlochPoint> photon2_bloch_vector(const CorrelationScan& scan);
std::vector<BlochPoint> photon2_bloch_vector(const QDParams& params, const MonteCarloConfig& mc,
                                             const std::vector<double>& t23_grid);

enum class ParityBasis { kCircular, kLinear };

struct ParityPoint {
  double t23_ps = 0.0;
  Estimate given_r3;  // P(R2|R3) or P(H2|R3)
  Estimate given_l3;  // P(R2|L3) or P(H2|L3)
};

std::vector<ParityPoint> parity_curves(const CorrelationScan& scan, ParityBasis basis);
std::vector<ParityPoint> parity_curves(const QDParams& params, const MonteCarloConfig& mc,
                                       const std::vector<double>& t23_grid, ParityBasis basis);

/// Truth tables as the experiment measures them: the linear entries at
/// t23 = t12 and the circular entries at t23 = 2 t12. Spin up at t3 is
/// photon #3 in R.
TruthTable simulate_truth_table(const QDParams& params, const MonteCarloConfig& mc);

struct CurveRow {
  double t23_ps = 0.0;
  std::string quantity;
  double value = 0.0;
  double stderr_ = 0.0;
};

std::vector<CurveRow> bloch_rows(const std::vector<BlochPoint>& points);
std::vector<CurveRow> parity_rows(const std::vector<ParityPoint>& points, ParityBasis basis);

/// CSV with header "t23_ps,quantity,value,stderr".
void write_curves_csv(std::ostream& os, const std::vector<CurveRow>& rows);
std::vector<CurveRow> read_curves_csv(std::istream& is);

}  // namespace spinphoton
