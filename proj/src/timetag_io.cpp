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

#include "spinphoton/timetag_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

#include "spinphoton/conditional_dynamics.hpp"

namespace spinphoton {
namespace {

constexpr char kMagic[8] = {'S', 'P', 'I', 'N', 'T', 'A', 'G', '1'};

template <typename T>
void put_le(unsigned char* out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

template <typename T>
T get_le(const unsigned char* in) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(in[i]) << (8 * i));
  return v;
}

std::uint64_t to_ps(double t) {
  if (!(t >= 0.0)) throw ValidationError("negative time cannot be stored in a tag stream");
  return static_cast<std::uint64_t>(std::llround(t));
}

}  // namespace

VersionMismatchError::VersionMismatchError(std::uint32_t found)
    : TagFormatError("tag stream version " + std::to_string(found) + " is not supported (expected " +
                     std::to_string(kTagFormatVersion) + ")"),
      found_(found) {}

TruncatedStreamError::TruncatedStreamError(std::optional<std::uint64_t> record_index)
    : TagFormatError(record_index ? "tag stream truncated at record " + std::to_string(*record_index)
                                  : std::string("tag stream truncated inside the header")),
      record_index_(record_index) {}

void TagStreamHeader::validate() const {
  if (rep_period_ps == 0) throw ValidationError("tag header: rep_period_ps must be > 0");
  if (!(pulse_offsets_ps[0] < pulse_offsets_ps[1] && pulse_offsets_ps[1] < pulse_offsets_ps[2] &&
        pulse_offsets_ps[2] < rep_period_ps)) {
    throw ValidationError("tag header: pulse offsets must increase and stay inside the period");
  }
  if (setting_id >= 12) throw ValidationError("tag header: setting_id must be < 12");
}

std::vector<std::uint64_t> TagStream::channel(std::uint8_t c) const {
  std::vector<std::uint64_t> out;
  for (const auto& r : records) {
    if (r.channel == c) out.push_back(r.timestamp_ps);
  }
  return out;
}

void write_stream(std::ostream& os, const TagStream& s) {
  s.header.validate();
  if (s.header.record_count != s.records.size()) {
    throw ValidationError("tag header record_count does not match the records");
  }
  unsigned char h[kTagHeaderBytes] = {};
  std::memcpy(h, kMagic, 8);
  put_le<std::uint32_t>(h + 8, s.header.version);
  put_le<std::uint64_t>(h + 12, s.header.rep_period_ps);
  for (int i = 0; i < 3; ++i) put_le<std::uint64_t>(h + 20 + 8 * i, s.header.pulse_offsets_ps[i]);
  put_le<std::uint32_t>(h + 44, s.header.setting_id);
  put_le<std::uint64_t>(h + 48, s.header.record_count);
  os.write(reinterpret_cast<const char*>(h), sizeof h);
  for (const auto& r : s.records) {
    unsigned char rec[kTagRecordBytes] = {};
    put_le<std::uint64_t>(rec, r.timestamp_ps);
    rec[8] = r.channel;
    os.write(reinterpret_cast<const char*>(rec), sizeof rec);
  }
  if (!os) throw std::runtime_error("failed to write tag stream");
}

void write_stream(const std::filesystem::path& path, const TagStream& s) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ValidationError("cannot open " + path.string() + " for writing");
  write_stream(os, s);
}

TagStream read_stream(std::istream& is) {
  unsigned char h[kTagHeaderBytes];
  is.read(reinterpret_cast<char*>(h), sizeof h);
  if (is.gcount() >= 8 && std::memcmp(h, kMagic, 8) != 0) {
    throw BadMagicError("tag stream has bad magic (expected SPINTAG1)");
  }
  if (static_cast<std::size_t>(is.gcount()) != sizeof h) throw TruncatedStreamError(std::nullopt);
  TagStream s;
  s.header.version = get_le<std::uint32_t>(h + 8);
  if (s.header.version != kTagFormatVersion) throw VersionMismatchError(s.header.version);
  s.header.rep_period_ps = get_le<std::uint64_t>(h + 12);
  for (int i = 0; i < 3; ++i) s.header.pulse_offsets_ps[i] = get_le<std::uint64_t>(h + 20 + 8 * i);
  s.header.setting_id = get_le<std::uint32_t>(h + 44);
  s.header.record_count = get_le<std::uint64_t>(h + 48);
  s.header.validate();
  for (std::uint64_t i = 0; i < s.header.record_count; ++i) {
    unsigned char rec[kTagRecordBytes];
    is.read(reinterpret_cast<char*>(rec), sizeof rec);
    if (static_cast<std::size_t>(is.gcount()) != sizeof rec) throw TruncatedStreamError(i);
    TimeTagRecord r;
    r.timestamp_ps = get_le<std::uint64_t>(rec);
    r.channel = rec[8];
    if (r.channel >= 3) {
      throw TagFormatError("tag record " + std::to_string(i) + " has channel " +
                           std::to_string(r.channel));
    }
    s.records.push_back(r);
  }
  return s;
}

TagStream read_stream(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open " + path.string());
  return read_stream(is);
}

ArmSplit ArmSplit::from_budget(const EfficiencyBudget& b) {
  const auto& f = b.demultiplexing.factors;
  if (f.size() != 3) throw ValidationError("demultiplexing budget needs three factors");
  return {f[0].value, f[1].value, f[2].value};
}

void ArmSplit::validate() const {
  for (double v : {npbs1_transmission, npbs2_transmission, coupler}) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("arm split factors must be in [0, 1]");
  }
}

std::array<double, 3> ArmSplit::routing() const {
  return {1.0 - npbs1_transmission, npbs1_transmission * (1.0 - npbs2_transmission),
          npbs1_transmission * npbs2_transmission};
}

std::array<double, 3> ArmSplit::efficiencies() const {
  auto r = routing();
  for (double& v : r) v *= coupler;
  return r;
}

TagModel::TagModel(const QDParams& params, const MonteCarloConfig& mc, std::uint32_t setting_id,
                   const TagOptions& options)
    : params_(params), options_(options) {
  params_.validate();
  options_.arms.validate();
  if (!(options_.max_delay_ps > 0.0)) throw ValidationError("tags.max_delay_ps must be > 0");
  if (setting_id >= 12) throw ValidationError("setting_id must be < 12");
  const PolarizationTriple setting = waveplate_settings()[setting_id];
  const std::array<Polarization, 3> arm_pol = {setting.p1, setting.p2, setting.p3};

  header_.rep_period_ps = to_ps(params_.rep_period_ps());
  header_.pulse_offsets_ps = {to_ps(options_.t1_offset_ps),
                              to_ps(options_.t1_offset_ps + params_.t12_ps),
                              to_ps(options_.t1_offset_ps + params_.t12_ps + params_.t23_ps)};
  header_.setting_id = setting_id;
  header_.validate();

  const std::array<double, 3> routing = options_.arms.routing();
  const double click_eff = options_.arms.coupler * params_.eta;
  const std::array<double, 3> windows = {params_.t12_ps, params_.t23_ps, final_window_ps(params_)};

  const MonteCarloResult r = average(mc, params_.sigma_O_mT, [&](const OverhauserSample& s) {
    const Superoperator l = dot_liouvillian(params_, s.b_mT);
    const Superoperator pulse = pulse_superoperator(params_.theta, params_.normalized_pulse);
    // click[w][a] and dark[w][a] for window w and arm a.
    std::array<std::array<Superoperator, 3>, 3> click, dark;
    for (int w = 0; w < 3; ++w) {
      const Superoperator k = propagate(l, windows[w]);
      for (int a = 0; a < 3; ++a) {
        const Superoperator j =
            jump_superoperator(PolarizationVector(arm_pol[a]), 1.0, params_.gamma());
        const Superoperator b = click_eff * (k - propagate(l - j, windows[w]));
        click[w][a] = pulse * b;
        dark[w][a] = pulse * (k - b);
      }
    }
    Matrix4c rho0 = Matrix4c::Zero();
    rho0(kUp, kUp) = 0.5;
    rho0(kDown, kDown) = 0.5;
    const Vector16c start = pulse * vec4(rho0);
    const Vector16c trace_row = vec4(Matrix4c::Identity());
    Eigen::VectorXd out(216);
    for (int a0 = 0; a0 < 3; ++a0) {
      for (int a1 = 0; a1 < 3; ++a1) {
        for (int a2 = 0; a2 < 3; ++a2) {
          const double route = routing[a0] * routing[a1] * routing[a2];
          for (unsigned c = 0; c < 8; ++c) {
            Vector16c v = start;
            const std::array<int, 3> arms = {a0, a1, a2};
            for (int w = 0; w < 3; ++w) {
              v = ((c >> w) & 1u) ? (click[w][arms[w]] * v).eval() : (dark[w][arms[w]] * v).eval();
            }
            // The last factor applied a pulse after the final window; it is
            // unitary and leaves the trace unchanged.
            out(static_cast<Eigen::Index>(cell(arms, c))) =
                route * std::max(0.0, (trace_row.transpose() * v)(0).real());
          }
        }
      }
    }
    return out;
  });
  for (std::size_t i = 0; i < 216; ++i) probabilities_[i] = r.mean(static_cast<Eigen::Index>(i));
}

double TagModel::expected_singles(int arm) const {
  double total = 0.0;
  for (int a0 = 0; a0 < 3; ++a0) {
    for (int a1 = 0; a1 < 3; ++a1) {
      for (int a2 = 0; a2 < 3; ++a2) {
        const std::array<int, 3> arms = {a0, a1, a2};
        for (unsigned c = 0; c < 8; ++c) {
          int hits = 0;
          for (int w = 0; w < 3; ++w) hits += (((c >> w) & 1u) && arms[w] == arm) ? 1 : 0;
          total += hits * probabilities_[cell(arms, c)];
        }
      }
    }
  }
  return total;
}

double TagModel::coincidence_probability() const { return probabilities_[cell({0, 1, 2}, 7)]; }

TagStream generate_stream(const TagModel& model, double duration_s, std::uint64_t seed) {
  if (!(duration_s > 0.0)) throw ValidationError("tag duration must be > 0");
  const QDParams& p = model.params();
  const auto periods = static_cast<std::uint64_t>(std::llround(duration_s * p.f_MHz * 1e6));

  std::array<double, 216> cdf{};
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    acc += model.probabilities()[i];
    cdf[i] = acc;
  }

  TagStream s;
  s.header = model.header();
  const double tau = p.T1_ps;
  const double tail = 1.0 - std::exp(-model.options().max_delay_ps / tau);
  constexpr std::uint64_t kBlock = 1u << 16;
  for (std::uint64_t block = 0; block * kBlock < periods; ++block) {
    std::mt19937_64 rng(sample_seed(seed, block));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const std::uint64_t end = std::min(periods, (block + 1) * kBlock);
    for (std::uint64_t period = block * kBlock; period < end; ++period) {
      const double u = uniform(rng) * acc;
      const auto idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      if (idx >= cdf.size()) continue;
      const unsigned clicks = static_cast<unsigned>(idx % 8);
      const std::size_t route = idx / 8;
      const std::array<int, 3> arms = {static_cast<int>(route / 9), static_cast<int>(route / 3 % 3),
                                       static_cast<int>(route % 3)};
      for (int w = 0; w < 3; ++w) {
        if (!((clicks >> w) & 1u)) continue;
        // Truncated exponential emission delay.
        const double delay = -tau * std::log(1.0 - uniform(rng) * tail);
        s.records.push_back({period * s.header.rep_period_ps + s.header.pulse_offsets_ps[w] +
                                 static_cast<std::uint64_t>(std::llround(delay)),
                             static_cast<std::uint8_t>(arms[w])});
      }
    }
  }
  std::stable_sort(s.records.begin(), s.records.end(),
                   [](const TimeTagRecord& a, const TimeTagRecord& b) {
                     return a.timestamp_ps < b.timestamp_ps;
                   });
  s.header.record_count = s.records.size();
  return s;
}

CoincidenceReport count_coincidences(const TagStream& stream, double window_ps) {
  const TagStreamHeader& h = stream.header;
  h.validate();
  const auto& off = h.pulse_offsets_ps;
  const double min_gap = static_cast<double>(std::min(
      {off[1] - off[0], off[2] - off[1], h.rep_period_ps - off[2] + off[0]}));
  if (!(window_ps > 0.0) || !(window_ps < min_gap)) {
    throw ValidationError("coincidence window must be positive and below the smallest pulse gap");
  }
  CoincidenceReport report;
  report.setting_id = h.setting_id;
  report.setting = waveplate_settings()[h.setting_id];

  std::uint64_t current = 0;
  unsigned mask = 0;
  bool have_period = false;
  auto close_period = [&] {
    constexpr unsigned wanted = (1u << 0) | (1u << 4) | (1u << 8);  // arm a at pulse a
    if ((mask & wanted) == wanted) ++report.coincidences;
    mask = 0;
  };
  std::uint64_t previous = 0;
  for (std::size_t i = 0; i < stream.records.size(); ++i) {
    const TimeTagRecord& r = stream.records[i];
    if (i > 0 && r.timestamp_ps < previous) {
      throw ValidationError("tag stream is not sorted at record " + std::to_string(i));
    }
    if (r.channel >= 3) throw ValidationError("tag record " + std::to_string(i) + " has bad channel");
    previous = r.timestamp_ps;
    const std::uint64_t period = r.timestamp_ps / h.rep_period_ps;
    const std::uint64_t phase = r.timestamp_ps % h.rep_period_ps;
    if (!have_period || period != current) {
      if (have_period) close_period();
      current = period;
      have_period = true;
    }
    int pulse = -1;
    double best = window_ps;
    for (int k = 0; k < 3; ++k) {
      const double d = std::abs(static_cast<double>(phase) - static_cast<double>(off[k]));
      if (d < best) {
        best = d;
        pulse = k;
      }
    }
    if (pulse < 0) {
      ++report.unassigned;
      continue;
    }
    const unsigned bit = 1u << (3 * r.channel + pulse);
    if (mask & bit) continue;  // first tag per (arm, pulse) wins
    mask |= bit;
    ++report.singles[r.channel];
  }
  if (have_period) close_period();
  return report;
}

std::optional<Estimate> estimate_conditional(std::uint64_t n_a, std::uint64_t n_b) {
  const double n = static_cast<double>(n_a + n_b);
  if (n == 0.0) return std::nullopt;
  const double p = static_cast<double>(n_a) / n;
  return Estimate{p, std::sqrt(p * (1.0 - p) / n)};
}

}  // namespace spinphoton
