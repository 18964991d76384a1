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

// Command-line front end: JSON run configuration and the subcommands.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinphoton/entanglement_bounds.hpp"
#include "spinphoton/overhauser_mc.hpp"
#include "spinphoton/parameter_fit.hpp"
#include "spinphoton/process_map.hpp"
#include "spinphoton/qd_model.hpp"
#include "spinphoton/rate_budget.hpp"
#include "spinphoton/timetag_io.hpp"

namespace spinphoton {

struct CorrelationCommand {
  double t23_start_ps = 50.0;
  double t23_stop_ps = 6500.0;
  double t23_step_ps = 50.0;

  std::vector<double> grid() const;
};

struct FidelityCommand {
  int k_max = 4;
  ChainStart start = ChainStart::kPrecessedUp;
  bool per_sample = false;
  int batches = 10;
  /// Compose the ideal map instead of the simulated one.
  bool ideal = false;
};

struct BoundsCommand {
  TruthTable table = TruthTable::measured();
  /// Spin-photon correlation s_x entering F_{s,2p}.
  double s_x = -0.915;
  std::size_t suite_count = 100;
};

struct TagsCommand {
  std::uint32_t setting_id = 0;
  bool all_settings = false;
  double duration_s = 0.05;
  double max_delay_ps = 400.0;
  double t1_offset_ps = 0.0;
  double window_ps = 500.0;
  std::vector<std::string> inputs;
};

struct FitCommand {
  std::string dataset;
  /// Restricts the fit to these quantities; empty keeps every row.
  std::vector<std::string> quantities;
  FitVector start = {0.6, 0.3, 0.4, 10.5};
  FitBounds bounds;
  int max_iterations = 500;
  double tolerance = 1e-3;
  double initial_step = 0.1;
};

struct ReproduceCommand {
  std::vector<int> criteria = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
};

struct RunConfig {
  QDParams qd;
  MonteCarloConfig mc;
  EfficiencyBudget budget = EfficiencyBudget::published();
  std::string output_dir = "run";
  CorrelationCommand correlations;
  FidelityCommand fidelity;
  BoundsCommand bounds;
  TagsCommand tags;
  FitCommand fit;
  ReproduceCommand reproduce;

  /// Re-validates every block; errors name the field path.
  void validate() const;
};

/// Overlays `j` on the defaults. Unknown keys and mistyped values raise
/// ValidationError with their path, e.g. "qd.T1_ps".
RunConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);

/// Row-major list of [re, im] pairs with the shape alongside.
nlohmann::json matrix_json(const CMatrix& m);

/// Entry point of the executable; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace spinphoton
