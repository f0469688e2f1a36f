// Copyright 2026 The Philter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "philter/io.hpp"
#include "philter/protocols.hpp"

namespace philter {
namespace {

namespace fs = std::filesystem;
using io::json;

TEST(Json, ParsesComplexEntries) {
  EXPECT_EQ(io::parse_complex(json(1.5), "x"), cplx(1.5, 0.0));
  EXPECT_EQ(io::parse_complex(json::array({0.5, -2.0}), "x"), cplx(0.5, -2.0));
  EXPECT_THROW(io::parse_complex(json::array({1.0}), "x"), io::FormatError);
  EXPECT_THROW(io::parse_complex(json("1"), "x"), io::FormatError);
}

TEST(Json, HamiltonianRoundTrip) {
  const auto model = h2::model();
  const auto back = io::parse_hamiltonian(io::hamiltonian_to_json(model));
  EXPECT_LT((back.hamiltonian() - model.hamiltonian()).norm(), 1e-15);
  EXPECT_EQ(back.scale(), model.scale());
  EXPECT_EQ(back.shift(), model.shift());
  for (std::uint64_t y : {0u, 37u, 302u, 1023u}) EXPECT_EQ(back.decode(y, 10), model.decode(y, 10));
}

TEST(Json, HamiltonianErrorsNameTheProblem) {
  auto msg = [](const json& j) {
    try {
      io::parse_hamiltonian(j);
    } catch (const io::FormatError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(msg(json::array()).find("object"), std::string::npos);
  EXPECT_NE(msg(json{{"dim", 2}}).find("matrix"), std::string::npos);
  EXPECT_NE(msg(json{{"dim", 3}, {"matrix", {{1, 0}, {0, 1}}}}).find("dim"), std::string::npos);
  EXPECT_NE(msg(json{{"matrix", {{1, 0}, {0}}}}).find("row 1"), std::string::npos);
  EXPECT_NE(msg(json{{"matrix", {{1, "a"}, {0, 1}}}}).find("matrix[0][1]"), std::string::npos);
  // Well-formed but not Hermitian: rejected by the model, not the parser.
  EXPECT_THROW(io::parse_hamiltonian(json{{"matrix", {{0, 1}, {0, 0}}}}), InvalidArgument);
}

TEST(Json, AnsatzForms) {
  EXPECT_TRUE(std::holds_alternative<BasisAnsatz>(io::parse_ansatz(json{{"basis", 1}})));
  EXPECT_TRUE(std::holds_alternative<RyAnsatz>(io::parse_ansatz(json{{"ry_theta", 0.3}})));
  const auto v = io::parse_ansatz(json{{"vector", {{1, 0}, 0}}});
  ASSERT_TRUE(std::holds_alternative<ExplicitAnsatz>(v));
  EXPECT_EQ(std::get<ExplicitAnsatz>(v).amplitudes.size(), 2u);
  EXPECT_THROW(io::parse_ansatz(json{{"basis", -1}}), io::FormatError);
  EXPECT_THROW(io::parse_ansatz(json{{"other", 1}}), io::FormatError);

  const auto ry = io::parse_ansatz_argument("ry:0.25");
  ASSERT_TRUE(std::holds_alternative<RyAnsatz>(ry));
  EXPECT_DOUBLE_EQ(std::get<RyAnsatz>(ry).theta, 0.25);
  EXPECT_EQ(std::get<BasisAnsatz>(io::parse_ansatz_argument("basis:1")).index, 1u);
  EXPECT_THROW(io::parse_ansatz_argument("ry:abc"), io::FormatError);
  EXPECT_THROW(io::parse_ansatz_argument("basis:1.5"), io::FormatError);
  EXPECT_THROW(io::parse_ansatz_argument("/nonexistent/ansatz.json"), io::FormatError);
}

TEST(Json, OverlapFixture) {
  const auto spec = io::parse_overlaps(io::read_json_file(PHILTER_DATA_DIR "/n2_overlaps_example.json"));
  EXPECT_EQ(spec.overlaps.size(), 7u);
  ASSERT_EQ(spec.windows.size(), 3u);
  EXPECT_EQ(spec.windows[1].prefix, "0010101101");
  EXPECT_THROW(io::parse_overlaps(json{{"overlaps", json::array()}}), io::FormatError);
  EXPECT_THROW(io::parse_overlaps(json{{"overlaps", {{{"label", 1}, {"prob", 0.1}}}},
                                       {"windows", json::array()}}),
               io::FormatError);
}

TEST(Json, UnreadableAndMalformedFiles) {
  EXPECT_THROW(io::read_json_file("/nonexistent/file.json"), io::FormatError);
  const fs::path p = fs::temp_directory_path() / "philter_io_bad.json";
  std::ofstream(p) << "{ not json";
  EXPECT_THROW(io::read_json_file(p.string()), io::FormatError);
  fs::remove(p);
}

TEST(Json, ReportBitsDecodeToEnergy) {
  const auto model = h2::exact_phase_model(10);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    PhilterOptions o;
    o.m = 10;
    o.t = 6;
    o.seed = seed;
    const RunReport r = philter(model, h2::ansatz_with_excited_probability(0.25), EnergyWindow("00"), o);
    const json j = json::parse(io::report_to_json(r).dump());
    EXPECT_EQ(j["schema"], io::kReportSchema);
    EXPECT_EQ(j["protocol"], "philter");
    const auto bits = j["bits"].get<std::string>();
    ASSERT_EQ(static_cast<int>(bits.size()), j["m"].get<int>());
    EXPECT_EQ(model.decode(bits_to_uint(bits), 10), j["energy"].get<double>());
    EXPECT_EQ(j["estimate"]["qpe_applications"], 127);
  }
}

// --- command line ---------------------------------------------------------

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const fs::path out = fs::temp_directory_path() / ("philter_cli_" + std::to_string(::getpid()) + ".out");
  const std::string cmd = std::string(PHILTER_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  fs::remove(out);
  return r;
}

TEST(Cli, QpeTwoBitReadout) {
  const auto r = run_cli("qpe --m 2 --seed 5 --runs 2000");
  ASSERT_EQ(r.code, 0) << r.out;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["schema"], "philter.qpe/1");
  double p01 = 0.0;
  int n01 = 0;
  for (const auto& o : j["outcomes"]) {
    if (o["bits"] == "01") {
      p01 = o["probability"];
      n01 = o["count"];
    }
  }
  // Ground-state best 2-bit estimate; exact mass just above 0.9.
  EXPECT_NEAR(p01, 0.90, 0.02);
  EXPECT_NEAR(n01 / 2000.0, p01, 0.03);
}

TEST(Cli, PhilterSucceeds) {
  const auto r = run_cli("philter --m 10 --t 6 --window 00 --ansatz ry:0 --seed 2");
  ASSERT_EQ(r.code, 0) << r.out;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["schema"], io::kReportSchema);
  EXPECT_TRUE(j["success"].get<bool>());
  EXPECT_EQ(h2::model().decode(bits_to_uint(j["bits"].get<std::string>()), 10), j["energy"].get<double>());
}

TEST(Cli, HamiltonianFileMatchesBuiltin) {
  const fs::path h = fs::temp_directory_path() / "philter_cli_h2.json";
  ASSERT_EQ(run_cli("export-h2 --out " + h.string()).code, 0);
  const auto a = run_cli("qpe --m 4");
  const auto b = run_cli("qpe --m 4 --hamiltonian " + h.string());
  fs::remove(h);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, GuardExhaustionIsProtocolFailure) {
  // Window 11 holds almost no mass for the HF state; a one-iteration guard cannot succeed.
  const auto r = run_cli("qphilter --m 6 --window 11 --seed 1 --max-iterations 1");
  EXPECT_EQ(r.code, 2) << r.out;
}

TEST(Cli, UsageAndInputErrors) {
  EXPECT_EQ(run_cli("philter --m 10 --t 6 --window 0a --seed 1").code, 1);
  EXPECT_EQ(run_cli("philter --m 1 --t 6 --window 00 --seed 1").code, 1);
  EXPECT_EQ(run_cli("philter --m 10 --t 6 --window 00").code, 1);  // no seed
  EXPECT_EQ(run_cli("philter --t 6 --window 00 --seed 1").code, 1);  // no --m
  EXPECT_EQ(run_cli("qpe --m abc").code, 1);
  EXPECT_EQ(run_cli("no-such-command").code, 1);
  const auto missing = run_cli("qpe --m 2 --hamiltonian /nonexistent/h.json");
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.out.find("/nonexistent/h.json"), std::string::npos);
  EXPECT_EQ(run_cli("window-for --emin 0 --emax 0.1 --m 6").code, 1);  // no exact cover
}

TEST(Cli, CapacityErrorIsReported) {
  const auto r = run_cli("qpe --m 30");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("capacity"), std::string::npos) << r.out;
}

TEST(Cli, PlanKFixture) {
  const auto r = run_cli("plan-k --overlaps " PHILTER_DATA_DIR "/n2_overlaps_example.json");
  ASSERT_EQ(r.code, 0) << r.out;
  const json j = json::parse(r.out);
  ASSERT_EQ(j["windows"].size(), 3u);
  EXPECT_EQ(j["windows"][0]["k"], 27);
  EXPECT_EQ(j["windows"][1]["k"], 6);
  EXPECT_EQ(j["windows"][2]["k"], 12);
}

TEST(Cli, BatchRunsAreReproducible) {
  const std::string args = "qphilter --m 6 --window 00 --ansatz ry:0.8 --seed 9 --runs 4 --format csv";
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 5);
}

}  // namespace
}  // namespace philter
