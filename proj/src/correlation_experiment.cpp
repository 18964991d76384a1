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

#include "spinphoton/correlation_experiment.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace spinphoton {
namespace {

constexpr std::array<Polarization, 6> kP2Order = {Polarization::H, Polarization::V,
                                                  Polarization::D, Polarization::A,
                                                  Polarization::R, Polarization::L};
constexpr std::array<Polarization, 2> kP3Order = {Polarization::R, Polarization::L};

std::size_t p2_position(Polarization p) {
  for (std::size_t i = 0; i < kP2Order.size(); ++i) {
    if (kP2Order[i] == p) return i;
  }
  throw ValidationError("unknown photon #2 polarization");
}

std::size_t p3_position(Polarization p) {
  if (p == Polarization::R) return 0;
  if (p == Polarization::L) return 1;
  throw ValidationError("photon #3 is analysed in R or L only");
}

Vector16c initial_state() {
  Matrix4c rho = Matrix4c::Zero();
  rho(kUp, kUp) = 0.5;
  rho(kDown, kDown) = 0.5;
  return vec4(rho);
}

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw ValidationError("t23 grid is empty");
  double previous = 0.0;
  for (double t : grid) {
    if (!(t > previous)) throw ValidationError("t23 grid must be positive and strictly increasing");
    previous = t;
  }
}

}  // namespace

std::string PolarizationTriple::label() const {
  return std::string(to_string(p1)) + std::string(to_string(p2)) + std::string(to_string(p3));
}

const std::array<PolarizationTriple, 12>& waveplate_settings() {
  static const std::array<PolarizationTriple, 12> settings = [] {
    std::array<PolarizationTriple, 12> s{};
    for (std::size_t i = 0; i < kP2Order.size(); ++i) {
      for (std::size_t j = 0; j < kP3Order.size(); ++j) {
        s[2 * i + j] = {Polarization::R, kP2Order[i], kP3Order[j]};
      }
    }
    return s;
  }();
  return settings;
}

std::size_t setting_index(Polarization p2, Polarization p3) {
  return 2 * p2_position(p2) + p3_position(p3);
}

PulseSequence PulseSequence::from_params(const QDParams& p) {
  PulseSequence s;
  s.t12_ps = p.t12_ps;
  s.t23_ps = p.t23_ps;
  s.theta = p.theta;
  s.rep_period_ps = p.rep_period_ps();
  return s;
}

void PulseSequence::validate() const {
  if (!(t1_ps >= 0.0)) throw ValidationError("pulse sequence: t1 must be >= 0");
  if (!(t12_ps > 0.0) || !(t23_ps > 0.0)) {
    throw ValidationError("pulse sequence: pulse times must be strictly increasing");
  }
  if (!(pulse_times()[2] < rep_period_ps)) {
    throw ValidationError("pulse sequence: third pulse falls outside the repetition period");
  }
}

ConditionalSimulator::ConditionalSimulator(const QDParams& params,
                                           const Eigen::Vector3d& b_overhauser_mT)
    : params_(params),
      l_(dot_liouvillian(params, b_overhauser_mT)),
      pulse_(pulse_superoperator(params.theta, params.normalized_pulse)) {}

Superoperator ConditionalSimulator::jump(Polarization p) const {
  return jump_superoperator(PolarizationVector(p), params_.eta, params_.gamma());
}

const Superoperator& ConditionalSimulator::bright(Polarization p, double t_ps) const {
  const auto key = std::make_pair(static_cast<int>(p), t_ps);
  auto it = bright_cache_.find(key);
  if (it == bright_cache_.end()) {
    it = bright_cache_.emplace(key, bright_propagator(l_, jump(p), t_ps)).first;
  }
  return it->second;
}

ConditionalState ConditionalSimulator::three_pulse(const PolarizationTriple& pols) const {
  PulseSequence::from_params(params_).validate();
  Vector16c v = pulse_ * initial_state();
  v = pulse_ * (bright(pols.p1, params_.t12_ps) * v);
  v = pulse_ * (bright(pols.p2, params_.t23_ps) * v);
  v = bright(pols.p3, final_window_ps(params_)) * v;
  ConditionalState out;
  out.rho = unvec4(v);
  out.rho = 0.5 * (out.rho + out.rho.adjoint()).eval();
  out.probability = out.rho.trace().real();
  return out;
}

ConditionalState three_pulse_conditional(const QDParams& params, const OverhauserSample& sample,
                                         Polarization p1, Polarization p2, Polarization p3) {
  params.validate();
  return ConditionalSimulator(params, sample.b_mT).three_pulse({p1, p2, p3});
}

Estimate CoincidenceTable::at(const PolarizationTriple& t) const {
  for (std::size_t i = 0; i < settings.size(); ++i) {
    if (settings[i] == t) return {probabilities[i], stderrs[i]};
  }
  throw ValidationError("coincidence table has no entry " + t.label());
}

void CoincidenceTable::validate() const {
  if (probabilities.size() != settings.size() || stderrs.size() != settings.size()) {
    throw ValidationError("coincidence table columns have different lengths");
  }
  for (std::size_t i = 0; i < settings.size(); ++i) {
    if (!(probabilities[i] >= -1e-9 && probabilities[i] <= 1.0 + 1e-9)) {
      throw ValidationError("coincidence probability outside [0, 1] for " + settings[i].label());
    }
  }
}

CoincidenceTable coincidence_table(const QDParams& params, const MonteCarloConfig& mc,
                                   const std::vector<PolarizationTriple>& settings) {
  params.validate();
  const MonteCarloResult r = average(mc, params.sigma_O_mT, [&](const OverhauserSample& s) {
    const ConditionalSimulator sim(params, s.b_mT);
    Eigen::VectorXd out(static_cast<Eigen::Index>(settings.size()));
    for (std::size_t i = 0; i < settings.size(); ++i) {
      out(static_cast<Eigen::Index>(i)) = sim.three_pulse(settings[i]).probability;
    }
    return out;
  });
  CoincidenceTable table;
  table.settings = settings;
  table.probabilities.assign(r.mean.data(), r.mean.data() + r.mean.size());
  table.stderrs.assign(r.stderr_mean.data(), r.stderr_mean.data() + r.stderr_mean.size());
  return table;
}

std::optional<Estimate> conditional_ratio(const Estimate& a, const Estimate& b) {
  const double den = a.value + b.value;
  if (!(den > 0.0)) return std::nullopt;
  const double var = b.value * b.value * a.stderr_ * a.stderr_ +
                     a.value * a.value * b.stderr_ * b.stderr_;
  return Estimate{a.value / den, std::sqrt(var) / (den * den)};
}

NamedRatios conditional_probabilities(const CoincidenceTable& table) {
  table.validate();
  auto ratio = [&](Polarization num, Polarization other, Polarization p3)
      -> std::optional<Estimate> {
    const PolarizationTriple a{Polarization::R, num, p3};
    const PolarizationTriple b{Polarization::R, other, p3};
    const auto has = [&](const PolarizationTriple& t) {
      for (const auto& s : table.settings) {
        if (s == t) return true;
      }
      return false;
    };
    if (!has(a) || !has(b)) return std::nullopt;
    return conditional_ratio(table.at(a), table.at(b));
  };
  using P = Polarization;
  return {ratio(P::R, P::L, P::R), ratio(P::R, P::L, P::L), ratio(P::H, P::V, P::R),
          ratio(P::H, P::V, P::L)};
}

std::vector<double> default_t23_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 130; ++i) grid.push_back(50.0 * i);
  return grid;
}

Eigen::VectorXd scan_sample(const QDParams& params, const Eigen::Vector3d& b_overhauser_mT,
                            const std::vector<double>& t23_grid) {
  check_grid(t23_grid);
  const ConditionalSimulator sim(params, b_overhauser_mT);
  const Superoperator& pulse = sim.pulse();
  const Superoperator& l = sim.liouvillian();

  // State just before the second bright window.
  const Vector16c w = pulse * (sim.bright(Polarization::R, params.t12_ps) * (pulse * initial_state()));

  // Row functionals rho -> Tr[B_p3(t_final) P rho].
  const Vector16c trace_row = vec4(Matrix4c::Identity());
  std::array<Eigen::Matrix<Complex, 1, 16>, 2> readout;
  for (std::size_t j = 0; j < kP3Order.size(); ++j) {
    readout[j] = trace_row.transpose() * sim.bright(kP3Order[j], final_window_ps(params)) * pulse;
  }

  // Generators: index 0 is the full Liouvillian, 1..6 are L - J_p2.
  std::array<Superoperator, 7> generators;
  generators[0] = l;
  for (std::size_t i = 0; i < kP2Order.size(); ++i) generators[i + 1] = l - sim.jump(kP2Order[i]);

  std::array<Vector16c, 7> state;
  state.fill(w);
  std::array<Superoperator, 7> step;
  double step_length = -1.0;
  double elapsed = 0.0;

  Eigen::VectorXd out(static_cast<Eigen::Index>(12 * t23_grid.size()));
  for (std::size_t g = 0; g < t23_grid.size(); ++g) {
    const double delta = t23_grid[g] - elapsed;
    if (std::abs(delta - step_length) > 1e-9 * std::max(1.0, delta)) {
      for (std::size_t k = 0; k < generators.size(); ++k) step[k] = propagate(generators[k], delta);
      step_length = delta;
    }
    for (std::size_t k = 0; k < state.size(); ++k) state[k] = (step[k] * state[k]).eval();
    elapsed = t23_grid[g];
    for (std::size_t i = 0; i < kP2Order.size(); ++i) {
      const Vector16c bright = state[0] - state[i + 1];
      for (std::size_t j = 0; j < kP3Order.size(); ++j) {
        out(static_cast<Eigen::Index>(12 * g + 2 * i + j)) = (readout[j] * bright)(0).real();
      }
    }
  }
  return out;
}

CorrelationScan::CorrelationScan(const QDParams& params, const MonteCarloConfig& mc,
                                 std::vector<double> t23_grid)
    : params_(params), grid_(std::move(t23_grid)) {
  params_.validate();
  check_grid(grid_);
  result_ = average(mc, params_.sigma_O_mT, [this](const OverhauserSample& s) {
    return scan_sample(params_, s.b_mT, grid_);
  });
}

Estimate CorrelationScan::probability(std::size_t g, Polarization p2, Polarization p3) const {
  const Eigen::Index c = column(g, setting_index(p2, p3));
  return {result_.mean(c), result_.stderr_mean(c)};
}

Estimate CorrelationScan::conditional(std::size_t g, Polarization p2, Polarization p3) const {
  const auto [value, err] = result_.ratio(column(g, setting_index(p2, p3)),
                                          column(g, setting_index(orthogonal(p2), p3)));
  return {value, err};
}

std::vector<BlochPoint> photon2_bloch_vector(const CorrelationScan& scan) {
  using P = Polarization;
  std::vector<BlochPoint> points;
  for (std::size_t g = 0; g < scan.grid().size(); ++g) {
    BlochPoint b;
    b.t23_ps = scan.grid()[g];
    const std::array<P, 3> axis = {P::H, P::D, P::R};
    for (int k = 0; k < 3; ++k) {
      const Estimate r = scan.conditional(g, axis[k], P::R);
      const Estimate l = scan.conditional(g, axis[k], P::L);
      b.given_r3(k) = 2.0 * r.value - 1.0;
      b.given_l3(k) = 2.0 * l.value - 1.0;
      b.stderr_r3(k) = 2.0 * r.stderr_;
      b.stderr_l3(k) = 2.0 * l.stderr_;
    }
    points.push_back(b);
  }
  return points;
}

std::vector<BlochPoint> photon2_bloch_vector(const QDParams& params, const MonteCarloConfig& mc,
                                             const std::vector<double>& t23_grid) {
  return photon2_bloch_vector(CorrelationScan(params, mc, t23_grid));
}

std::vector<ParityPoint> parity_curves(const CorrelationScan& scan, ParityBasis basis) {
  const Polarization p2 = basis == ParityBasis::kCircular ? Polarization::R : Polarization::H;
  std::vector<ParityPoint> points;
  for (std::size_t g = 0; g < scan.grid().size(); ++g) {
    points.push_back({scan.grid()[g], scan.conditional(g, p2, Polarization::R),
                      scan.conditional(g, p2, Polarization::L)});
  }
  return points;
}

std::vector<ParityPoint> parity_curves(const QDParams& params, const MonteCarloConfig& mc,
                                       const std::vector<double>& t23_grid, ParityBasis basis) {
  return parity_curves(CorrelationScan(params, mc, t23_grid), basis);
}

TruthTable simulate_truth_table(const QDParams& params, const MonteCarloConfig& mc) {
  using P = Polarization;
  const CorrelationScan scan(params, mc, {params.t12_ps, 2.0 * params.t12_ps});
  TruthTable t;
  t.v_up = scan.conditional(0, P::V, P::R);
  t.h_up = scan.conditional(0, P::H, P::R);
  t.v_down = scan.conditional(0, P::V, P::L);
  t.h_down = scan.conditional(0, P::H, P::L);
  t.plus_up = scan.conditional(1, P::R, P::R);
  t.minus_up = scan.conditional(1, P::L, P::R);
  t.plus_down = scan.conditional(1, P::R, P::L);
  t.minus_down = scan.conditional(1, P::L, P::L);
  return t;
}

std::vector<CurveRow> bloch_rows(const std::vector<BlochPoint>& points) {
  static const std::array<const char*, 3> names = {"sx", "sy", "sz"};
  std::vector<CurveRow> rows;
  for (const BlochPoint& b : points) {
    for (int k = 0; k < 3; ++k) {
      rows.push_back({b.t23_ps, std::string(names[k]) + "_given_R3", b.given_r3(k), b.stderr_r3(k)});
      rows.push_back({b.t23_ps, std::string(names[k]) + "_given_L3", b.given_l3(k), b.stderr_l3(k)});
    }
  }
  return rows;
}

std::vector<CurveRow> parity_rows(const std::vector<ParityPoint>& points, ParityBasis basis) {
  const std::string p2 = basis == ParityBasis::kCircular ? "R2" : "H2";
  std::vector<CurveRow> rows;
  for (const ParityPoint& p : points) {
    rows.push_back({p.t23_ps, "P(" + p2 + "|R3)", p.given_r3.value, p.given_r3.stderr_});
    rows.push_back({p.t23_ps, "P(" + p2 + "|L3)", p.given_l3.value, p.given_l3.stderr_});
  }
  return rows;
}

void write_curves_csv(std::ostream& os, const std::vector<CurveRow>& rows) {
  os << "t23_ps,quantity,value,stderr\n";
  os << std::setprecision(12);
  for (const CurveRow& r : rows) {
    os << r.t23_ps << ',' << r.quantity << ',' << r.value << ',' << r.stderr_ << '\n';
  }
}

std::vector<CurveRow> read_curves_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("t23_ps,quantity,value,stderr", 0) != 0) {
    throw ValidationError("curve CSV must start with header t23_ps,quantity,value,stderr");
  }
  std::vector<CurveRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string t, q, v, e;
    if (!std::getline(ss, t, ',') || !std::getline(ss, q, ',') || !std::getline(ss, v, ',') ||
        !std::getline(ss, e)) {
      throw ValidationError("curve CSV line " + std::to_string(line_no) + ": expected 4 fields");
    }
    try {
      rows.push_back({std::stod(t), q, std::stod(v), std::stod(e)});
    } catch (const std::exception&) {
      throw ValidationError("curve CSV line " + std::to_string(line_no) + ": bad number");
    }
  }
  return rows;
}

}  // namespace spinphoton
