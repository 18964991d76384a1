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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "spinphoton/timetag_io.hpp"

using namespace spinphoton;
using Catch::Approx;

namespace {

TagStream hand_stream(std::vector<TimeTagRecord> records, std::uint32_t setting = 3) {
  TagStream s;
  s.header.rep_period_ps = 12000;
  s.header.pulse_offsets_ps = {0, 810, 1620};
  s.header.setting_id = setting;
  s.header.record_count = records.size();
  s.records = std::move(records);
  return s;
}

std::string bytes_of(const TagStream& s) {
  std::ostringstream os;
  write_stream(os, s);
  return os.str();
}

}  // namespace

TEST_CASE("header and records have the documented byte layout") {
  const TagStream s = hand_stream({{0x0102030405060708ULL, 2}});
  const std::string b = bytes_of(s);
  REQUIRE(b.size() == kTagHeaderBytes + kTagRecordBytes);
  CHECK(b.substr(0, 8) == "SPINTAG1");
  CHECK(static_cast<unsigned char>(b[8]) == kTagFormatVersion);
  CHECK(static_cast<unsigned char>(b[12]) == (12000 & 0xff));
  CHECK(static_cast<unsigned char>(b[44]) == 3);
  CHECK(static_cast<unsigned char>(b[48]) == 1);
  CHECK(static_cast<unsigned char>(b[56]) == 0x08);  // little-endian timestamp
  CHECK(static_cast<unsigned char>(b[63]) == 0x01);
  CHECK(static_cast<unsigned char>(b[64]) == 2);
  for (std::size_t i = 65; i < 72; ++i) CHECK(b[i] == 0);
}

TEST_CASE("write and read round trip is byte-identical") {
  const TagStream s = hand_stream({{5, 0}, {900, 1}, {1700, 2}, {12100, 0}});
  const std::string first = bytes_of(s);
  std::istringstream in(first);
  const TagStream back = read_stream(in);
  CHECK(back.header == s.header);
  CHECK(back.records == s.records);
  CHECK(bytes_of(back) == first);

  const auto path = std::filesystem::temp_directory_path() / "spinphoton_roundtrip.bin";
  write_stream(path, s);
  CHECK(read_stream(path).records == s.records);
  std::filesystem::remove(path);
}

TEST_CASE("malformed streams raise specific errors") {
  std::string good = bytes_of(hand_stream({{5, 0}, {900, 1}}));
  {
    std::string bad = good;
    bad[0] = 'X';
    std::istringstream in(bad);
    CHECK_THROWS_AS(read_stream(in), BadMagicError);
  }
  {
    std::string bad = good;
    bad[8] = 9;
    std::istringstream in(bad);
    try {
      read_stream(in);
      FAIL("no error");
    } catch (const VersionMismatchError& e) {
      CHECK(e.found() == 9);
    }
  }
  {
    std::istringstream in(good.substr(0, good.size() - 3));
    try {
      read_stream(in);
      FAIL("no error");
    } catch (const TruncatedStreamError& e) {
      REQUIRE(e.record_index());
      CHECK(*e.record_index() == 1);
    }
  }
  {
    std::istringstream in(good.substr(0, 20));
    try {
      read_stream(in);
      FAIL("no error");
    } catch (const TruncatedStreamError& e) {
      CHECK_FALSE(e.record_index());
    }
  }
  std::istringstream empty("");
  CHECK_THROWS_AS(read_stream(empty), TagFormatError);
}

TEST_CASE("header validation") {
  TagStreamHeader h;
  h.rep_period_ps = 12000;
  h.pulse_offsets_ps = {0, 810, 1620};
  CHECK_NOTHROW(h.validate());
  h.pulse_offsets_ps = {0, 1620, 810};
  CHECK_THROWS_AS(h.validate(), ValidationError);
  h.pulse_offsets_ps = {0, 810, 13000};
  CHECK_THROWS_AS(h.validate(), ValidationError);
  h.pulse_offsets_ps = {0, 810, 1620};
  h.setting_id = 12;
  CHECK_THROWS_AS(h.validate(), ValidationError);
}

TEST_CASE("coincidences counted from hand-placed tags") {
  const TagStream s = hand_stream({
      // period 0: full coincidence, plus a second tag on arm 0 at pulse 1
      {100, 0}, {150, 0}, {1000, 1}, {1800, 2},
      // period 1: arm 1 at the wrong pulse
      {12050, 0}, {12100, 1}, {13700, 2},
      // period 2: full coincidence and a tag far from every pulse
      {24010, 0}, {24900, 1}, {25700, 2}, {30000, 1},
  });
  const CoincidenceReport r = count_coincidences(s, 400.0);
  CHECK(r.coincidences == 2);
  CHECK(r.unassigned == 1);
  CHECK(r.singles[0] == 3);
  CHECK(r.singles[1] == 3);
  CHECK(r.singles[2] == 3);
  CHECK(r.setting.label() == "RVL");
}

TEST_CASE("empty stream and invalid inputs") {
  const CoincidenceReport r = count_coincidences(hand_stream({}));
  CHECK(r.coincidences == 0);
  CHECK(r.unassigned == 0);
  CHECK_THROWS_AS(count_coincidences(hand_stream({{900, 1}, {100, 0}})), ValidationError);
  CHECK_THROWS_AS(count_coincidences(hand_stream({{100, 5}})), ValidationError);
  CHECK_THROWS_AS(count_coincidences(hand_stream({}), 900.0), ValidationError);
}

TEST_CASE("binomial conditional estimate") {
  const auto e = estimate_conditional(30, 10);
  REQUIRE(e);
  CHECK(e->value == Approx(0.75));
  CHECK(e->stderr_ == Approx(std::sqrt(0.75 * 0.25 / 40.0)));
  CHECK_FALSE(estimate_conditional(0, 0));
}

TEST_CASE("arm split follows the demultiplexer") {
  const ArmSplit a;
  const auto r = a.routing();
  CHECK(r[0] == Approx(0.37));
  CHECK(r[1] == Approx(0.63 * 0.59));
  CHECK(r[2] == Approx(0.63 * 0.41));
  CHECK(r[0] + r[1] + r[2] == Approx(1.0));
  CHECK(a.efficiencies()[2] == Approx(0.63 * 0.41 * 0.7));
  const ArmSplit b = ArmSplit::from_budget(EfficiencyBudget::published());
  CHECK(b.npbs1_transmission == 0.63);
  ArmSplit bad;
  bad.coupler = 1.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("tag model is a normalized distribution") {
  MonteCarloConfig mc;
  mc.n_samples = 10;
  const TagModel m(QDParams{}, mc, 0);
  double total = 0.0;
  for (double p : m.probabilities()) {
    CHECK(p >= 0.0);
    total += p;
  }
  CHECK(total == Approx(1.0).epsilon(1e-9));
  CHECK(m.coincidence_probability() == m.probabilities()[TagModel::cell({0, 1, 2}, 7)]);
  CHECK(m.expected_singles(0) > 0.0);
}

TEST_CASE("generated streams are deterministic, sorted and match the model rate") {
  MonteCarloConfig mc;
  mc.n_samples = 10;
  QDParams p;
  const TagModel m(p, mc, 4);
  const double duration = 2e5 / (p.f_MHz * 1e6);
  const TagStream a = generate_stream(m, duration, 99);
  const TagStream b = generate_stream(m, duration, 99);
  CHECK(a.records == b.records);
  CHECK(a.header.record_count == a.records.size());
  for (std::size_t i = 1; i < a.records.size(); ++i) {
    CHECK(a.records[i - 1].timestamp_ps <= a.records[i].timestamp_ps);
  }
  const CoincidenceReport r = count_coincidences(a);
  const double expected = 2e5 * m.coincidence_probability();
  CHECK(std::abs(static_cast<double>(r.coincidences) - expected) < 5.0 * std::sqrt(expected) + 1.0);
  const double singles = 2e5 * m.expected_singles(1);
  CHECK(std::abs(static_cast<double>(r.singles[1]) - singles) < 5.0 * std::sqrt(singles));
}
