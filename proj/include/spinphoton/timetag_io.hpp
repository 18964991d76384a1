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

// Synthetic detector time tags, their binary file format, and three-fold
// coincidence counting.
//
// File layout, little-endian:
//   header (56 bytes)
//     0  char[8]  magic "SPINTAG1"
//     8  u32      version
//    12  u64      rep_period_ps
//    20  u64[3]   pulse offsets t1, t2, t3 within a period (ps)
//    44  u32      setting_id (index into the 12 waveplate settings)
//    48  u64      record_count
//   records (16 bytes each)
//     0  u64      timestamp (ps since stream start)
//     8  u8       channel (detector arm 0, 1, 2)
//     9  u8[7]    zero

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <vector>

#include "spinphoton/correlation_experiment.hpp"
#include "spinphoton/errors.hpp"
#include "spinphoton/rate_budget.hpp"

namespace spinphoton {

inline constexpr std::uint32_t kTagFormatVersion = 1;
inline constexpr std::size_t kTagHeaderBytes = 56;
inline constexpr std::size_t kTagRecordBytes = 16;

/// Malformed tag stream. Subclasses distinguish the failure.
class TagFormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class BadMagicError : public TagFormatError {
 public:
  using TagFormatError::TagFormatError;
};

class VersionMismatchError : public TagFormatError {
 public:
  VersionMismatchError(std::uint32_t found);
  std::uint32_t found() const { return found_; }

 private:
  std::uint32_t found_;
};

class TruncatedStreamError : public TagFormatError {
 public:
  /// `record_index` is the first record that could not be read; empty when
  /// the header itself is short.
  explicit TruncatedStreamError(std::optional<std::uint64_t> record_index);
  std::optional<std::uint64_t> record_index() const { return record_index_; }

 private:
  std::optional<std::uint64_t> record_index_;
};

struct TimeTagRecord {
  std::uint64_t timestamp_ps = 0;
  std::uint8_t channel = 0;

  bool operator==(const TimeTagRecord&) const = default;
};

struct TagStreamHeader {
  std::uint32_t version = kTagFormatVersion;
  std::uint64_t rep_period_ps = 0;
  std::array<std::uint64_t, 3> pulse_offsets_ps{};
  std::uint32_t setting_id = 0;
  std::uint64_t record_count = 0;

  /// Offsets strictly increasing and below the period; setting_id < 12.
  void validate() const;
  bool operator==(const TagStreamHeader&) const = default;
};

struct TagStream {
  TagStreamHeader header;
  std::vector<TimeTagRecord> records;

  /// Timestamps of one channel, in stream order.
  std::vector<std::uint64_t> channel(std::uint8_t c) const;
};

void write_stream(std::ostream& os, const TagStream& s);
void write_stream(const std::filesystem::path& path, const TagStream& s);
TagStream read_stream(std::istream& is);
TagStream read_stream(const std::filesystem::path& path);

/// Passive demultiplexer: the first splitter reflects to arm 0 and
/// transmits to the second, which reflects to arm 1 and transmits to arm 2.
/// Each arm then loses the connector factor.
struct ArmSplit {
  double npbs1_transmission = 0.63;
  double npbs2_transmission = 0.41;
  double coupler = 0.7;

  static ArmSplit from_budget(const EfficiencyBudget& b);
  void validate() const;
  /// Probability that a photon is routed to each arm.
  std::array<double, 3> routing() const;
  /// Routing times coupler.
  std::array<double, 3> efficiencies() const;
};

struct TagOptions {
  ArmSplit arms;
  /// Emission delays are exponential in T1, truncated here.
  double max_delay_ps = 400.0;
  /// First pulse offset within the period.
  double t1_offset_ps = 0.0;
};

/// Joint distribution, per laser period, of (arm of each photon, click in
/// each window) for one waveplate setting, averaged over Overhauser fields.
/// Arm a analyses in polarization setting[a].
class TagModel {
 public:
  TagModel(const QDParams& params, const MonteCarloConfig& mc, std::uint32_t setting_id,
           const TagOptions& options = {});

  /// Cell of (arm reached by the photon of each window, click bitmask with
  /// bit k set when window k clicks); 27 x 8 cells.
  static std::size_t cell(const std::array<int, 3>& arms, unsigned clicks) {
    return static_cast<std::size_t>(((arms[0] * 3 + arms[1]) * 3 + arms[2]) * 8) + clicks;
  }
  const std::array<double, 216>& probabilities() const { return probabilities_; }

  /// Expected clicks per period on an arm.
  double expected_singles(int arm) const;
  /// Probability per period of the arm0@1, arm1@2, arm2@3 coincidence.
  double coincidence_probability() const;

  const TagStreamHeader& header() const { return header_; }
  const QDParams& params() const { return params_; }
  const TagOptions& options() const { return options_; }

 private:
  QDParams params_;
  TagOptions options_;
  TagStreamHeader header_;
  std::array<double, 216> probabilities_{};
};

/// One draw from the model per laser period; `periods` = duration * f.
TagStream generate_stream(const TagModel& model, double duration_s, std::uint64_t seed);

struct CoincidenceReport {
  std::uint32_t setting_id = 0;
  PolarizationTriple setting;
  std::uint64_t coincidences = 0;
  std::array<std::uint64_t, 3> singles{};  // assigned tags per arm
  std::uint64_t unassigned = 0;
};

/// Assigns each tag to the nearest pulse offset within `window_ps` and
/// counts periods with arm 0 at pulse 1, arm 1 at pulse 2 and arm 2 at
/// pulse 3. Only the first tag per (arm, period, pulse) is kept.
CoincidenceReport count_coincidences(const TagStream& stream, double window_ps = 500.0);

/// P(p2 | p3) from coincidence counts of orthogonal-p2 settings, with a
/// binomial standard error. Empty when both counts are zero.
std::optional<Estimate> estimate_conditional(std::uint64_t n_a, std::uint64_t n_b);

}  // namespace spinphoton
