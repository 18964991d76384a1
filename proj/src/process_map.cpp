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

#include "spinphoton/process_map.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "spinphoton/conditional_dynamics.hpp"

namespace spinphoton {
namespace {

constexpr std::array<Polarization, 6> kPolOrder = {Polarization::R, Polarization::L,
                                                   Polarization::H, Polarization::V,
                                                   Polarization::D, Polarization::A};

Matrix4c embed_ground(const Matrix2c& s) {
  Matrix4c m = Matrix4c::Zero();
  m.topLeftCorner<2, 2>() = s;
  return m;
}

Matrix2c spin_projector(InitialSpin s) {
  const Eigen::Vector2cd k = spin_ket(s);
  return k * k.adjoint();
}

/// Window propagators of one field sample, pulse included.
struct WindowMaps {
  Superoperator full;                   // K(t) P
  std::array<Superoperator, 6> bright;  // B_p(t) P
};

WindowMaps window_maps(const QDParams& params, const Eigen::Vector3d& b, double t_ps) {
  const Superoperator l = dot_liouvillian(params, b);
  const Superoperator pulse = pulse_superoperator(params.theta, params.normalized_pulse);
  WindowMaps w;
  const Superoperator k = propagate(l, t_ps);
  w.full = k * pulse;
  for (std::size_t i = 0; i < kPolOrder.size(); ++i) {
    const Superoperator j =
        jump_superoperator(PolarizationVector(kPolOrder[i]), params.eta, params.gamma());
    w.bright[i] = (k - propagate(l - j, t_ps)) * pulse;
  }
  return w;
}

EmissionStates emission_from_maps(const WindowMaps& w, InitialSpin input) {
  const Vector16c rho = vec4(embed_ground(spin_projector(input)));
  EmissionStates s;
  for (std::size_t i = 0; i < kPolOrder.size(); ++i) {
    s.bright[i] = unvec4(w.bright[i] * rho).topLeftCorner<2, 2>();
  }
  const Matrix4c after = unvec4(w.full * rho);
  s.unemitted = after.bottomRightCorner<2, 2>().trace().real();
  return s;
}

CMatrix random_state(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> n01;
  CMatrix g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = Complex(n01(rng), n01(rng));
  }
  CMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

CMatrix random_operator(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> n01;
  CMatrix g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = Complex(n01(rng), n01(rng));
  }
  return g;
}

void check_k(int k) {
  if (k < 1 || k > 4) throw ValidationError("k must be in 1..4");
}

// Per-sample packing: for each input, six 2x2 bright blocks; then the four
// unemitted fractions; then the precessed-up and heralded ground blocks.
constexpr Eigen::Index kBlockReals = 8;
constexpr Eigen::Index kUnemittedOffset = 4 * 6 * kBlockReals;
constexpr Eigen::Index kPrecessedOffset = kUnemittedOffset + 4;
constexpr Eigen::Index kHeraldedOffset = kPrecessedOffset + kBlockReals;
constexpr Eigen::Index kSampleLength = kHeraldedOffset + kBlockReals;

void pack(Eigen::VectorXd& v, Eigen::Index offset, const Matrix2c& m) {
  for (Eigen::Index i = 0; i < 4; ++i) {
    v(offset + 2 * i) = m.data()[i].real();
    v(offset + 2 * i + 1) = m.data()[i].imag();
  }
}

Matrix2c unpack(const Eigen::VectorXd& v, Eigen::Index offset) {
  Matrix2c m;
  for (Eigen::Index i = 0; i < 4; ++i) m.data()[i] = Complex(v(offset + 2 * i), v(offset + 2 * i + 1));
  return m;
}

Eigen::VectorXd sample_vector(const QDParams& params, const Eigen::Vector3d& b) {
  const WindowMaps w = window_maps(params, b, params.t12_ps);
  Eigen::VectorXd v(kSampleLength);
  for (std::size_t k = 0; k < kTomographyInputs.size(); ++k) {
    const EmissionStates s = emission_from_maps(w, kTomographyInputs[k]);
    for (std::size_t p = 0; p < 6; ++p) {
      pack(v, static_cast<Eigen::Index>(k * 6 + p) * kBlockReals, s.bright[p]);
    }
    v(kUnemittedOffset + static_cast<Eigen::Index>(k)) = s.unemitted;
  }
  const Superoperator l = dot_liouvillian(params, b);
  const Matrix4c precessed =
      unvec4(propagate(l, params.t12_ps) * vec4(embed_ground(spin_projector(InitialSpin::kUp))));
  pack(v, kPrecessedOffset, precessed.topLeftCorner<2, 2>());
  Matrix2c mixed = Matrix2c::Identity() / 2.0;
  const Matrix4c heralded = unvec4(w.bright[0] * vec4(embed_ground(mixed)));
  pack(v, kHeraldedOffset, heralded.topLeftCorner<2, 2>());
  return v;
}

struct SampleSummary {
  ProcessMap map;
  Matrix2c rho_s;
  double unemitted = 0.0;
};

SampleSummary summarize(const Eigen::VectorXd& v, double t_ps, ChainStart start) {
  std::array<Matrix4d, 4> corr;
  SampleSummary out;
  for (std::size_t k = 0; k < 4; ++k) {
    EmissionStates s;
    for (std::size_t p = 0; p < 6; ++p) {
      s.bright[p] = unpack(v, static_cast<Eigen::Index>(k * 6 + p) * kBlockReals);
    }
    corr[k] = correlations_from_states(s);
    out.unemitted = std::max(out.unemitted, v(kUnemittedOffset + static_cast<Eigen::Index>(k)));
  }
  out.map = build_process_map(corr, t_ps);
  switch (start) {
    case ChainStart::kPlus:
      out.rho_s = Matrix2c::Constant(0.5);
      break;
    case ChainStart::kPrecessedUp:
      out.rho_s = unpack(v, kPrecessedOffset);
      break;
    case ChainStart::kHeralded:
      out.rho_s = unpack(v, kHeraldedOffset);
      break;
  }
  out.rho_s /= out.rho_s.trace().real();
  return out;
}

}  // namespace

Eigen::Vector2cd spin_ket(InitialSpin s) {
  const double r = 1.0 / std::numbers::sqrt2;
  switch (s) {
    case InitialSpin::kDown: return {0.0, 1.0};
    case InitialSpin::kUp: return {1.0, 0.0};
    case InitialSpin::kPlus: return {r, r};
    case InitialSpin::kPlusI: return {Complex(r), Complex(0.0, r)};
  }
  return {1.0, 0.0};
}

Matrix4c ProcessMap::apply(const Matrix2c& rho_s) const {
  const Eigen::Matrix<Complex, 4, 1> v = Eigen::Map<const Eigen::Matrix<Complex, 4, 1>>(rho_s.data());
  return unvec4(matrix * v);
}

Matrix4c TwoQubitMap::apply(const Matrix4c& rho) const { return unvec4(matrix * vec4(rho)); }

EmissionStates emission_states(const QDParams& params, const Eigen::Vector3d& b_overhauser_mT,
                               InitialSpin input, double t_ps) {
  params.validate();
  return emission_from_maps(window_maps(params, b_overhauser_mT, t_ps), input);
}

Matrix4d correlations_from_states(const EmissionStates& s) {
  const auto& pauli = paulis();
  auto expect = [&](std::size_t p, int i) { return (pauli[i] * s.bright[p]).trace().real(); };
  const double n_circ = s.bright[0].trace().real() + s.bright[1].trace().real();
  const double n_lin = s.bright[2].trace().real() + s.bright[3].trace().real();
  const double n_diag = s.bright[4].trace().real() + s.bright[5].trace().real();
  if (!(n_circ > 0.0 && n_lin > 0.0 && n_diag > 0.0)) {
    throw NumericalError("no photon emitted into one of the analysis bases");
  }
  Matrix4d c;
  for (int i = 0; i < 4; ++i) {
    c(i, 0) = (expect(0, i) + expect(1, i)) / n_circ;
    c(i, 1) = (expect(2, i) - expect(3, i)) / n_lin;
    c(i, 2) = (expect(4, i) - expect(5, i)) / n_diag;
    c(i, 3) = (expect(0, i) - expect(1, i)) / n_circ;
  }
  return c;
}

Matrix4d spin_photon_correlations(const QDParams& params, const MonteCarloConfig& mc,
                                  InitialSpin input, double t_ps, double tolerance) {
  params.validate();
  const MonteCarloResult r = average(mc, params.sigma_O_mT, [&](const OverhauserSample& s) {
    const EmissionStates e = emission_states(params, s.b_mT, input, t_ps);
    Eigen::VectorXd v(6 * kBlockReals + 1);
    for (std::size_t p = 0; p < 6; ++p) pack(v, static_cast<Eigen::Index>(p) * kBlockReals, e.bright[p]);
    v(6 * kBlockReals) = e.unemitted;
    return v;
  });
  EmissionStates avg;
  for (std::size_t p = 0; p < 6; ++p) avg.bright[p] = unpack(r.mean, static_cast<Eigen::Index>(p) * kBlockReals);
  avg.unemitted = r.mean(6 * kBlockReals);
  if (avg.unemitted > tolerance) {
    throw NumericalError("emission window not converged: unemitted trion fraction " +
                         std::to_string(avg.unemitted));
  }
  return correlations_from_states(avg);
}

Matrix4c state_from_correlations(const Matrix4d& c) {
  const auto& pauli = paulis();
  Matrix4c rho = Matrix4c::Zero();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) rho += c(i, j) * Matrix4c(kron(pauli[i], pauli[j]));
  }
  return rho / 4.0;
}

Matrix4d correlations_from_state(const Matrix4c& rho_sp) {
  const auto& pauli = paulis();
  Matrix4d c;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) c(i, j) = (Matrix4c(kron(pauli[i], pauli[j])) * rho_sp).trace().real();
  }
  return c;
}

ProcessMap build_process_map(const std::array<Matrix4d, 4>& correlations, double t_ps) {
  Eigen::Matrix4cd inputs;
  Map16x4 outputs;
  for (std::size_t k = 0; k < 4; ++k) {
    const Matrix2c in = spin_projector(kTomographyInputs[k]);
    inputs.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::Vector4cd>(in.data());
    outputs.col(static_cast<Eigen::Index>(k)) = vec4(state_from_correlations(correlations[k]));
  }
  const Eigen::FullPivLU<Eigen::Matrix4cd> lu(inputs);
  if (lu.rank() < 4) throw NumericalError("process-map constraint system is singular");
  ProcessMap c;
  c.condition_time_ps = t_ps;
  c.matrix = outputs * lu.inverse();
  const double residual = (c.matrix * inputs - outputs).cwiseAbs().maxCoeff();
  if (residual > 1e-8) {
    throw NumericalError("process-map linear system residual " + std::to_string(residual));
  }
  return c;
}

Matrix4d correlations_from_map(const ProcessMap& c, InitialSpin input) {
  return correlations_from_state(c.apply(spin_projector(input)));
}

ProcessMap ideal_step_map() {
  const double r = 1.0 / std::numbers::sqrt2;
  Matrix2c u;
  u << r, -r, r, r;  // exp(-i pi sigma_y / 4)
  Eigen::Matrix<Complex, 4, 2> k0 = Eigen::Matrix<Complex, 4, 2>::Zero();
  k0(0, 0) = 1.0;
  k0(3, 1) = 1.0;
  const Eigen::Matrix<Complex, 4, 2> k = Matrix4c(kron(u, Matrix2c::Identity())) * k0;
  ProcessMap c;
  for (Eigen::Index idx = 0; idx < 4; ++idx) {
    Matrix2c e = Matrix2c::Zero();
    e(idx % 2, idx / 2) = 1.0;
    c.matrix.col(idx) = vec4(k * e * k.adjoint());
  }
  return c;
}

TwoQubitMap to_two_qubit(const ProcessMap& c) {
  TwoQubitMap d;
  // Input basis |a, 0><b, 0| (photon R on both sides) has row 2a, column 2b.
  for (Eigen::Index a = 0; a < 2; ++a) {
    for (Eigen::Index b = 0; b < 2; ++b) {
      d.matrix.col(2 * a + 4 * (2 * b)) = c.matrix.col(a + 2 * b);
    }
  }
  return d;
}

CMatrix apply_step(const ProcessMap& c, const CMatrix& rho, int n_photons) {
  const Eigen::Index dp = Eigen::Index{1} << n_photons;
  if (rho.rows() != 2 * dp || rho.cols() != 2 * dp) {
    throw ValidationError("apply_step: operator dimension does not match photon count");
  }
  CMatrix out = CMatrix::Zero(4 * dp, 4 * dp);
  for (Eigen::Index a = 0; a < dp; ++a) {
    for (Eigen::Index b = 0; b < dp; ++b) {
      Matrix2c blk;
      for (Eigen::Index s = 0; s < 2; ++s) {
        for (Eigen::Index t = 0; t < 2; ++t) blk(s, t) = rho(s * dp + a, t * dp + b);
      }
      const Matrix4c o = c.apply(blk);
      for (Eigen::Index i = 0; i < 4; ++i) {
        for (Eigen::Index j = 0; j < 4; ++j) out(i * dp + a, j * dp + b) = o(i, j);
      }
    }
  }
  return out;
}

CMatrix apply_step(const TwoQubitMap& d, const CMatrix& rho, int n_photons) {
  const Eigen::Index dp = Eigen::Index{1} << n_photons;
  if (rho.rows() != 2 * dp || rho.cols() != 2 * dp) {
    throw ValidationError("apply_step: operator dimension does not match photon count");
  }
  // Insert a fresh |R> photon after the spin, then act with D on (spin, photon).
  Matrix2c fresh = Matrix2c::Zero();
  fresh(0, 0) = 1.0;
  CMatrix widened = CMatrix::Zero(4 * dp, 4 * dp);
  for (Eigen::Index s = 0; s < 2; ++s) {
    for (Eigen::Index t = 0; t < 2; ++t) {
      widened.block((2 * s) * dp, (2 * t) * dp, dp, dp) = rho.block(s * dp, t * dp, dp, dp);
    }
  }
  CMatrix out = CMatrix::Zero(4 * dp, 4 * dp);
  for (Eigen::Index a = 0; a < dp; ++a) {
    for (Eigen::Index b = 0; b < dp; ++b) {
      Matrix4c blk;
      for (Eigen::Index i = 0; i < 4; ++i) {
        for (Eigen::Index j = 0; j < 4; ++j) blk(i, j) = widened(i * dp + a, j * dp + b);
      }
      const Matrix4c o = d.apply(blk);
      for (Eigen::Index i = 0; i < 4; ++i) {
        for (Eigen::Index j = 0; j < 4; ++j) out(i * dp + a, j * dp + b) = o(i, j);
      }
    }
  }
  return out;
}

namespace {

template <typename Step>
ChainResult run_chain(const Step& step, int k, const Matrix2c& rho_s) {
  check_k(k);
  const ProcessMap ideal = ideal_step_map();
  CMatrix rho = rho_s;
  CMatrix target = Matrix2c::Constant(0.5);
  for (int n = 0; n < k; ++n) {
    rho = apply_step(step, rho, n);
    target = apply_step(ideal, target, n);
  }
  return {rho, (target * rho).trace().real()};
}

}  // namespace

ChainResult compose_and_fidelity(const ProcessMap& c, int k, const Matrix2c& rho_s) {
  return run_chain(c, k, rho_s);
}

ChainResult compose_two_qubit(const TwoQubitMap& d, int k, const Matrix2c& rho_s) {
  return run_chain(d, k, rho_s);
}

double hermiticity_residual(const ProcessMap& c, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const Matrix2c x = random_operator(rng, 2);
    const Matrix4c lhs = c.apply(x.adjoint());
    const Matrix4c rhs = c.apply(x).adjoint();
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

double hermiticity_residual(const TwoQubitMap& d, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const Matrix4c x = random_operator(rng, 4);
    const Matrix4c lhs = d.apply(x.adjoint());
    const Matrix4c rhs = d.apply(x).adjoint();
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

double trace_deviation(const ProcessMap& c, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const Matrix2c x = random_state(rng, 2);
    worst = std::max(worst, std::abs(c.apply(x).trace() - x.trace()));
  }
  return worst;
}

FidelityReport cluster_fidelities(const QDParams& params, const MonteCarloConfig& mc,
                                  const FidelityOptions& options) {
  params.validate();
  check_k(options.k_max);
  if (options.batches < 2) throw ValidationError("fidelity batches must be >= 2");
  const MonteCarloResult r = average(mc, params.sigma_O_mT, [&](const OverhauserSample& s) {
    return sample_vector(params, s.b_mT);
  });
  const auto n = static_cast<Eigen::Index>(r.n());
  const double t = params.t12_ps;

  // Fidelities of the averaged ensemble of rows [begin, end).
  auto fidelities = [&](Eigen::Index begin, Eigen::Index end) {
    std::vector<double> f(static_cast<std::size_t>(options.k_max), 0.0);
    if (!options.per_sample) {
      const Eigen::VectorXd mean = r.samples.middleRows(begin, end - begin).colwise().mean().transpose();
      const SampleSummary s = summarize(mean, t, options.start);
      for (int k = 1; k <= options.k_max; ++k) {
        f[static_cast<std::size_t>(k - 1)] = compose_and_fidelity(s.map, k, s.rho_s).fidelity;
      }
      return f;
    }
    for (Eigen::Index i = begin; i < end; ++i) {
      const SampleSummary s = summarize(r.samples.row(i).transpose(), t, options.start);
      for (int k = 1; k <= options.k_max; ++k) {
        f[static_cast<std::size_t>(k - 1)] += compose_and_fidelity(s.map, k, s.rho_s).fidelity;
      }
    }
    for (double& x : f) x /= static_cast<double>(end - begin);
    return f;
  };

  FidelityReport report;
  const SampleSummary whole = summarize(r.mean, t, options.start);
  report.map = whole.map;
  report.rho_s = whole.rho_s;
  report.unemitted = whole.unemitted;
  const std::vector<double> centre = fidelities(0, n);
  for (int k = 1; k <= options.k_max; ++k) {
    report.trace.push_back(compose_and_fidelity(whole.map, k, whole.rho_s).rho.trace().real());
  }

  // Batch means over contiguous index ranges.
  const Eigen::Index batches = std::min<Eigen::Index>(options.batches, n);
  std::vector<std::vector<double>> per_batch;
  if (batches >= 2) {
    for (Eigen::Index b = 0; b < batches; ++b) {
      per_batch.push_back(fidelities(b * n / batches, (b + 1) * n / batches));
    }
  }
  for (std::size_t k = 0; k < centre.size(); ++k) {
    double err = 0.0;
    if (!per_batch.empty()) {
      double mean = 0.0;
      for (const auto& f : per_batch) mean += f[k];
      mean /= static_cast<double>(per_batch.size());
      double var = 0.0;
      for (const auto& f : per_batch) var += (f[k] - mean) * (f[k] - mean);
      var /= static_cast<double>(per_batch.size() - 1);
      err = std::sqrt(var / static_cast<double>(per_batch.size()));
    }
    report.fidelity.push_back({centre[k], err});
  }
  return report;
}

}  // namespace spinphoton
