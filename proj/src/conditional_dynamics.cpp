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

#include "spinphoton/conditional_dynamics.hpp"

namespace spinphoton {

Superoperator liouvillian(const Matrix4c& h, const std::vector<Matrix4c>& collapse) {
  if (!is_hermitian(h)) throw ValidationError("liouvillian: Hamiltonian is not Hermitian");
  const Complex i(0.0, 1.0);
  Superoperator l = -i * (left_superop(h) - right_superop(h));
  for (const Matrix4c& a : collapse) {
    const Matrix4c ada = a.adjoint() * a;
    l += sandwich_superop(a, a) - 0.5 * (left_superop(ada) + right_superop(ada));
  }
  return l;
}

Superoperator jump_superoperator(const PolarizationVector& pol, double eta, double gamma) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("eta must be in (0, 1]");
  const Matrix4c s = polarization_lowering(pol);
  return eta * gamma * sandwich_superop(s, s);
}

Superoperator propagate(const Superoperator& l, double t_ps) {
  if (!(t_ps >= 0.0)) throw ValidationError("propagate: t must be >= 0");
  return expm(Superoperator(l * t_ps));
}

Superoperator bright_propagator(const Superoperator& l, const Superoperator& jump,
                                double t_ps) {
  return propagate(l, t_ps) - propagate(l - jump, t_ps);
}

Superoperator dot_liouvillian(const QDParams& p, const Eigen::Vector3d& b_overhauser_mT) {
  return liouvillian(spin_hamiltonian(p, b_overhauser_mT), collapse_operators(p));
}

}  // namespace spinphoton
