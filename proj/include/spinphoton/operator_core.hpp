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

// Dense operator and superoperator algebra on Eigen types.
//
// Vectorization is column stacking: vec(A X B) = (B^T kron A) vec(X). The
// left-multiplication superoperator of A is (I kron A), the right
// multiplication is (A^T kron I).

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spinphoton/errors.hpp"

namespace spinphoton {

using Complex = std::complex<double>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector4c = Eigen::Vector4cd;
using Matrix16c = Eigen::Matrix<Complex, 16, 16>;
using Vector16c = Eigen::Matrix<Complex, 16, 1>;

/// Operators on the four-level dot, basis {|up>, |down>, |T_up>, |T_down>}.
using DensityMatrix = Matrix4c;
/// Linear maps on column-stacked 4x4 operators.
using Superoperator = Matrix16c;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdFloor = -1e-9;

/// Kronecker product, (r_a r_b) x (c_a c_b).
template <typename DerivedA, typename DerivedB>
MatrixX<typename DerivedA::Scalar> kron(const Eigen::MatrixBase<DerivedA>& a,
                                        const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  MatrixX<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
          a(i, j) * b.template cast<Scalar>();
    }
  }
  return out;
}

/// Column-stacking vectorization.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> vec(
    const Eigen::MatrixBase<Derived>& m) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> v(m.size());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    v.segment(c * m.rows(), m.rows()) = m.col(c);
  }
  return v;
}

/// Inverse of vec for a square operator of dimension sqrt(v.size()).
template <typename Derived>
MatrixX<typename Derived::Scalar> unvec(const Eigen::MatrixBase<Derived>& v) {
  const auto n = static_cast<Eigen::Index>(
      std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (n * n != v.size()) {
    throw ValidationError("unvec: length is not a perfect square");
  }
  MatrixX<typename Derived::Scalar> m(n, n);
  for (Eigen::Index c = 0; c < n; ++c) m.col(c) = v.segment(c * n, n);
  return m;
}

inline Vector16c vec4(const Matrix4c& m) {
  return Eigen::Map<const Vector16c>(m.data());
}

inline Matrix4c unvec4(const Vector16c& v) {
  return Eigen::Map<const Matrix4c>(v.data());
}

/// X -> A X.
inline Superoperator left_superop(const Matrix4c& a) {
  return kron(Matrix4c::Identity(), a);
}

/// X -> X A.
inline Superoperator right_superop(const Matrix4c& a) {
  return kron(a.transpose(), Matrix4c::Identity());
}

/// X -> A X B^dagger.
inline Superoperator sandwich_superop(const Matrix4c& a, const Matrix4c& b) {
  return kron(b.conjugate(), a);
}

inline Matrix4c apply_superop(const Superoperator& s, const Matrix4c& rho) {
  return unvec4(s * vec4(rho));
}

/// Matrix exponential (scaling and squaring with Pade approximants).
CMatrix expm(const CMatrix& m);
Superoperator expm(const Superoperator& m);

/// Reduced operator on the `keep` subsystems (ascending order in the
/// result). Subsystem 0 is the most significant tensor factor.
CMatrix partial_trace(const CMatrix& rho, std::span<const std::size_t> dims,
                      std::span<const std::size_t> keep);

/// Tr[target rho] for a rank-1 unit-trace projector `target`.
double overlap_fidelity(const CMatrix& target, const CMatrix& rho);

/// Projector |psi><psi| for a normalized copy of psi.
CMatrix projector(const CVector& psi);

template <typename Derived>
double hermiticity_deviation(const Eigen::MatrixBase<Derived>& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m,
                  double tol = kHermitianTol) {
  return m.rows() == m.cols() && hermiticity_deviation(m) <= tol;
}

/// Smallest eigenvalue of the Hermitian part.
double min_eigenvalue(const CMatrix& m);

enum class TraceNorm { kNormalized, kSubnormalized };

/// Throws ValidationError unless m is a valid (sub)normalized state.
void check_density_matrix(const CMatrix& m,
                          TraceNorm norm = TraceNorm::kNormalized);

/// Pauli matrices in the order {I, X, Y, Z}.
const std::array<Matrix2c, 4>& paulis();

}  // namespace spinphoton
