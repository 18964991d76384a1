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

#include "spinphoton/operator_core.hpp"

#include <numeric>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace spinphoton {

CMatrix expm(const CMatrix& m) {
  if (m.rows() != m.cols()) {
    throw ValidationError("expm: matrix is " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", expected square");
  }
  return m.exp();
}

Superoperator expm(const Superoperator& m) { return m.exp(); }

CMatrix partial_trace(const CMatrix& rho, std::span<const std::size_t> dims,
                      std::span<const std::size_t> keep) {
  const std::size_t total = std::accumulate(dims.begin(), dims.end(),
                                            std::size_t{1}, std::multiplies<>());
  if (rho.rows() != rho.cols() ||
      static_cast<std::size_t>(rho.rows()) != total) {
    throw ValidationError("partial_trace: operator dimension " +
                          std::to_string(rho.rows()) +
                          " does not match subsystem product " +
                          std::to_string(total));
  }
  const std::size_t n = dims.size();
  std::vector<bool> kept(n, false);
  for (std::size_t k : keep) {
    if (k >= n) throw ValidationError("partial_trace: subsystem index out of range");
    kept[k] = true;
  }
  std::size_t keep_dim = 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (kept[k]) keep_dim *= dims[k];
  }

  // Row-major digit decomposition of a joint index; the first subsystem is
  // the most significant digit.
  std::vector<std::size_t> digits(n);
  auto decompose = [&](std::size_t idx) {
    for (std::size_t k = n; k-- > 0;) {
      digits[k] = idx % dims[k];
      idx /= dims[k];
    }
  };
  auto kept_index = [&]() {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (kept[k]) idx = idx * dims[k] + digits[k];
    }
    return idx;
  };
  auto traced_index = [&]() {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (!kept[k]) idx = idx * dims[k] + digits[k];
    }
    return idx;
  };

  std::vector<std::size_t> row_keep(total), row_trace(total);
  for (std::size_t i = 0; i < total; ++i) {
    decompose(i);
    row_keep[i] = kept_index();
    row_trace[i] = traced_index();
  }

  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(keep_dim),
                              static_cast<Eigen::Index>(keep_dim));
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = 0; j < total; ++j) {
      if (row_trace[i] == row_trace[j]) {
        out(static_cast<Eigen::Index>(row_keep[i]),
            static_cast<Eigen::Index>(row_keep[j])) +=
            rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  return out;
}

double min_eigenvalue(const CMatrix& m) {
  const CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double overlap_fidelity(const CMatrix& target, const CMatrix& rho) {
  if (target.rows() != rho.rows() || target.cols() != rho.cols()) {
    throw ValidationError("overlap_fidelity: dimension mismatch");
  }
  if (!is_hermitian(target, 1e-9) ||
      std::abs(target.trace() - Complex(1.0)) > 1e-9) {
    throw ValidationError("overlap_fidelity: target must be a unit-trace projector");
  }
  // A unit-trace Hermitian projector has Tr[P^2] = 1; any other rank gives less.
  if (std::abs((target * target).trace().real() - 1.0) > 1e-9) {
    throw ValidationError("overlap_fidelity: target is not rank 1");
  }
  return (target * rho).trace().real();
}

CMatrix projector(const CVector& psi) {
  const double norm = psi.norm();
  if (norm == 0.0) throw ValidationError("projector: zero vector");
  const CVector u = psi / norm;
  return u * u.adjoint();
}

void check_density_matrix(const CMatrix& m, TraceNorm norm) {
  if (m.rows() != m.cols()) throw ValidationError("density matrix must be square");
  if (!is_hermitian(m)) {
    throw ValidationError("density matrix is not Hermitian (deviation " +
                          std::to_string(hermiticity_deviation(m)) + ")");
  }
  const Complex tr = m.trace();
  if (std::abs(tr.imag()) > kTraceTol) {
    throw ValidationError("density matrix trace is not real");
  }
  if (norm == TraceNorm::kNormalized && std::abs(tr.real() - 1.0) > kTraceTol) {
    throw ValidationError("density matrix trace " + std::to_string(tr.real()) +
                          " != 1");
  }
  if (norm == TraceNorm::kSubnormalized &&
      (tr.real() < -kTraceTol || tr.real() > 1.0 + kTraceTol)) {
    throw ValidationError("conditional state trace outside [0, 1]");
  }
  if (min_eigenvalue(m) < kPsdFloor) {
    throw ValidationError("density matrix is not positive semidefinite");
  }
}

const std::array<Matrix2c, 4>& paulis() {
  static const std::array<Matrix2c, 4> kPaulis = [] {
    const Complex i(0.0, 1.0);
    std::array<Matrix2c, 4> p;
    p[0] << 1, 0, 0, 1;
    p[1] << 0, 1, 1, 0;
    p[2] << 0, -i, i, 0;
    p[3] << 1, 0, 0, -1;
    return p;
  }();
  return kPaulis;
}

}  // namespace spinphoton
