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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spinphoton/cli.hpp"
#include "spinphoton/correlation_experiment.hpp"
#include "spinphoton/errors.hpp"

using namespace spinphoton;
using nlohmann::json;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("spinphoton_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "spinphoton");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config_in.json";
  std::ofstream(p) << j.dump();
  return p;
}

}  // namespace

TEST_CASE("empty config yields the defaults") {
  const RunConfig c = parse_config(json::object());
  CHECK(c.qd.g_e == 0.6);
  CHECK(c.mc.n_samples == 1000);
  CHECK(c.budget.eta_s == 0.053);
  CHECK(c.output_dir == "run");
  CHECK(c.correlations.grid().size() == 130);
}

TEST_CASE("unknown keys are rejected with their path") {
  CHECK_THROWS_WITH(parse_config(json{{"qd", {{"T1", 200}}}}), Catch::Matchers::ContainsSubstring("qd.T1"));
  CHECK_THROWS_WITH(parse_config(json{{"extra", 1}}), Catch::Matchers::ContainsSubstring("extra"));
  CHECK_THROWS_WITH(parse_config(json{{"budget", {{"collection", {{"valu", 0.4}}}}}}),
                    Catch::Matchers::ContainsSubstring("budget.collection.valu"));
}

TEST_CASE("mistyped and invalid values are rejected") {
  CHECK_THROWS_WITH(parse_config(json{{"qd", {{"T1_ps", "long"}}}}), Catch::Matchers::ContainsSubstring("qd.T1_ps"));
  CHECK_THROWS_WITH(parse_config(json{{"qd", {{"T1_ps", -1}}}}), Catch::Matchers::ContainsSubstring("qd.T1_ps"));
  CHECK_THROWS_WITH(parse_config(json{{"fidelity", {{"k_max", 5}}}}),
                    Catch::Matchers::ContainsSubstring("fidelity.k_max"));
  CHECK_THROWS_AS(parse_config(json{{"fidelity", {{"start", "sideways"}}}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"bounds", {{"table", {{"v_up", 1.5}}}}}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"budget", {{"eta_s", 0.2}}}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"qd", 3}}), ValidationError);
}

TEST_CASE("resolved config round-trips through JSON") {
  const json in = {{"qd", {{"theta", 0.3}, {"normalized_pulse", true}}},
                   {"mc", {{"n_samples", 7}, {"master_seed", 9}}},
                   {"fidelity", {{"start", "plus"}}},
                   {"bounds", {{"table", {{"v_up", {0.8, 0.01}}, {"h_up", 0.2}}}}},
                   {"fit", {{"start", {{"g_e", 0.5}}}}}};
  const RunConfig c = parse_config(in);
  CHECK(c.qd.theta == 0.3);
  CHECK(c.fidelity.start == ChainStart::kPlus);
  CHECK(c.bounds.table.v_up.stderr_ == 0.01);
  CHECK(c.bounds.table.h_up.stderr_ == 0.02);
  const json out = to_json(c);
  const RunConfig again = parse_config(out);
  CHECK(to_json(again) == out);
}

TEST_CASE("matrix JSON is row-major re/im pairs") {
  CMatrix m(2, 2);
  m << Complex(1, 2), Complex(3, 4), Complex(5, 6), Complex(7, 8);
  const json j = matrix_json(m);
  CHECK(j["rows"] == 2);
  CHECK(j["entries"][1][0] == 3.0);
  CHECK(j["entries"][2][1] == 6.0);
}

TEST_CASE("exit codes for usage and validation failures") {
  const fs::path d = scratch_dir("exit");
  CHECK(run({}) == 2);
  CHECK(run({"nonsense"}) == 2);
  CHECK(run({"rates", "--config", write_config(d, json{{"qd", {{"zz", 1}}}}).string()}) == 2);
  CHECK(run({"fidelity", "--k-max", "0", "--out", (d / "f").string()}) == 2);
  CHECK(run({"count", "--out", (d / "c").string()}) == 2);
  CHECK(run({"fit", "--out", (d / "fit").string()}) == 2);
}

TEST_CASE("rates command writes text, CSV and the resolved config") {
  const fs::path d = scratch_dir("rates");
  REQUIRE(run({"rates", "--out", d.string()}) == 0);
  CHECK(fs::exists(d / "config.json"));
  const std::string csv = slurp(d / "rates.csv");
  CHECK(csv.rfind("row,photons,exact_MHz,rounded_MHz,published_MHz,matches", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
  CHECK(csv.find("false") == std::string::npos);
  CHECK(slurp(d / "rates.txt").find("9/9") != std::string::npos);
}

TEST_CASE("bounds command verdicts") {
  const fs::path d = scratch_dir("bounds");
  REQUIRE(run({"bounds", "--out", (d / "a").string()}) == 0);
  const json a = json::parse(slurp(d / "a" / "bounds.json"));
  CHECK(a["blinov_bound"]["value"].get<double>() == Approx(0.6514).margin(1e-4));
  CHECK(a["f_s2p"].get<double>() == Approx(0.6238).margin(1e-4));
  CHECK(a["verdict"] == "entangled");
  CHECK(a["verification_suite"]["all_hold"] == true);

  json mixed = json::object();
  for (const char* k : {"v_up", "h_up", "v_down", "h_down", "plus_up", "minus_up", "plus_down", "minus_down"}) {
    mixed[k] = 0.5;
  }
  const fs::path cfg = write_config(d, json{{"bounds", {{"table", mixed}, {"suite_count", 3}}}});
  REQUIRE(run({"bounds", "--config", cfg.string(), "--out", (d / "b").string()}) == 0);
  CHECK(json::parse(slurp(d / "b" / "bounds.json"))["verdict"] == "not demonstrated");
}

TEST_CASE("ideal fidelity command gives all ones") {
  const fs::path d = scratch_dir("fidelity");
  REQUIRE(run({"fidelity", "--ideal", "--out", d.string()}) == 0);
  const json f = json::parse(slurp(d / "fidelity.json"));
  REQUIRE(f["fidelity"].size() == 4);
  for (const auto& row : f["fidelity"]) CHECK(row["value"].get<double>() == Approx(1.0));
  CHECK(f["process_map"]["rows"] == 16);
  CHECK(f["process_map"]["entries"].size() == 64);
}

TEST_CASE("correlations are deterministic given the seed") {
  const fs::path d = scratch_dir("corr");
  const fs::path cfg = write_config(
      d, json{{"correlations", {{"t23_start_ps", 100}, {"t23_stop_ps", 1000}, {"t23_step_ps", 100}}}});
  for (const char* sub : {"a", "b"}) {
    REQUIRE(run({"correlations", "--config", cfg.string(), "--samples", "5", "--seed", "3", "--out",
                 (d / sub).string()}) == 0);
  }
  for (const char* f : {"bloch.csv", "parity_circular.csv", "parity_linear.csv"}) {
    CHECK(slurp(d / "a" / f) == slurp(d / "b" / f));
    CHECK(slurp(d / "a" / f).rfind("t23_ps,quantity,value,stderr\n", 0) == 0);
  }
  std::ifstream in(d / "a" / "bloch.csv");
  CHECK(read_curves_csv(in).size() == 10 * 6);
  REQUIRE(run({"correlations", "--config", cfg.string(), "--samples", "5", "--seed", "4", "--out",
               (d / "c").string()}) == 0);
  CHECK(slurp(d / "a" / "bloch.csv") != slurp(d / "c" / "bloch.csv"));
}

TEST_CASE("frozen nuclei give an undamped circular parity oscillation") {
  const fs::path d = scratch_dir("undamped");
  const QDParams p;
  const double period = p.larmor_period_ps();
  // Periods start ten trion lifetimes in, after the short-delay transient.
  const double start = 2000.0;
  const fs::path cfg = write_config(
      d, json{{"qd", {{"sigma_O_mT", 0.0}}},
              {"correlations", {{"t23_start_ps", start}, {"t23_stop_ps", start + 3 * period}, {"t23_step_ps", 10}}}});
  REQUIRE(run({"correlations", "--config", cfg.string(), "--out", d.string()}) == 0);
  std::ifstream in(d / "parity_circular.csv");
  std::vector<double> lo(3, 1.0), hi(3, 0.0);
  for (const auto& r : read_curves_csv(in)) {
    if (r.quantity != "P(R2|R3)") continue;
    const auto k = static_cast<std::size_t>((r.t23_ps - start) / period);
    if (k >= 3) continue;
    lo[k] = std::min(lo[k], r.value);
    hi[k] = std::max(hi[k], r.value);
  }
  CHECK(std::abs((hi[1] - lo[1]) - (hi[0] - lo[0])) < 1e-3);
  CHECK(std::abs((hi[2] - lo[2]) - (hi[0] - lo[0])) < 1e-3);
  CHECK(hi[0] - lo[0] > 0.5);
}

TEST_CASE("tags and count commands round trip") {
  const fs::path d = scratch_dir("tags");
  REQUIRE(run({"tags", "--setting", "6", "--duration", "0.002", "--samples", "5", "--out", d.string()}) == 0);
  const fs::path file = d / "tags_setting6.bin";
  REQUIRE(fs::exists(file));
  REQUIRE(run({"count", "--input", file.string(), "--out", (d / "count").string()}) == 0);
  const json c = json::parse(slurp(d / "count" / "coincidences.json"));
  CHECK(c["reports"][0]["setting_id"] == 6);
  CHECK(c["reports"][0]["unassigned"] == 0);

  std::ofstream(d / "junk.bin") << "not a tag file at all, clearly too short";
  CHECK(run({"count", "--input", (d / "junk.bin").string(), "--out", (d / "bad").string()}) == 2);
}

TEST_CASE("fit command reads a correlation CSV") {
  const fs::path d = scratch_dir("fit");
  std::vector<CurveRow> rows;
  for (int i = 1; i <= 4; ++i) rows.push_back({500.0 * i, "sz_given_R3", 0.0, 0.05});
  {
    std::ofstream os(d / "data.csv");
    write_curves_csv(os, rows);
  }
  const fs::path cfg = write_config(d, json{{"fit", {{"max_iterations", 3}}}});
  REQUIRE(run({"fit", "--config", cfg.string(), "--dataset", (d / "data.csv").string(), "--samples", "3", "--out",
               (d / "out").string()}) == 0);
  const json f = json::parse(slurp(d / "out" / "fit.json"));
  CHECK(f["points"] == 4);
  CHECK(f["params"].contains("g_e"));
  CHECK(f["iterations"] == 3);
}

TEST_CASE("reproduce-all writes a report for the selected criteria") {
  const fs::path d = scratch_dir("reproduce");
  REQUIRE(run({"reproduce-all", "--only", "1", "3", "9", "--out", d.string()}) == 0);
  const json r = json::parse(slurp(d / "report.json"));
  CHECK(r["results"].size() == 3);
  CHECK(r["passed"] == 3);
  CHECK(slurp(d / "report.txt").find("PASS [1]") != std::string::npos);
}
