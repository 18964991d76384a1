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

// Lindblad generator and the photon-number decomposition of its propagator.
//
//   K(t)    = exp(L t)                 full evolution
//   K0_p(t) = exp((L - J_p) t)         no photon detected in polarization p
//   B_p(t)  = K(t) - K0_p(t)           at least one photon detected in p

#include <algorithm>
#include <vector>

#include "spinphoton/operator_core.hpp"
#include "spinphoton/qd_model.hpp"

namespace spinphoton {

/// L rho = -i[H, rho] + sum_j (A_j rho A_j^dag - {A_j^dag A_j, rho}/2).
/// Throws ValidationError if H is not Hermitian.
Superoperator liouvillian(const Matrix4c& h, const std::vector<Matrix4c>& collapse);

/// J_p rho = eta gamma sigma_p rho sigma_p^dag.
Superoperator jump_superoperator(const PolarizationVector& pol, double eta, double gamma);

/// exp(L t). Throws ValidationError for t < 0.
Superoperator propagate(const Superoperator& l, double t_ps);

/// exp(L t) - exp((L - J) t).
Superoperator bright_propagator(const Superoperator& l, const Superoperator& jump,
                                double t_ps);

/// Window length standing in for t -> infinity after the last pulse.
inline double final_window_ps(const QDParams& p) {
  return std::max(6000.0, 30.0 * p.T1_ps);
}

/// Liouvillian of the dot for one static Overhauser field.
Superoperator dot_liouvillian(const QDParams& p, const Eigen::Vector3d& b_overhauser_mT);

}  // namespace spinphoton
