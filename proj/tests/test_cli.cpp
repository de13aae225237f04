// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks of the command-line driver: exit codes, output files,
// manifest payloads, and run-to-run determinism.  The binary under test is
// named by the VVSPEC_CLI environment variable.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vvspec/io.hpp"

using namespace vvspec;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

std::string cli_path() {
  const char* env = std::getenv("VVSPEC_CLI");
  return env != nullptr ? env : "./vvspec";
}

int run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("vvspec_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

std::vector<std::string> csv_lines(const std::string& path) {
  std::vector<std::string> lines;
  std::istringstream in(slurp(path));
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("usage errors exit with the configuration code") {
  TempDir td("usage");
  CHECK(run_cli("") == 2);                     // a subcommand is required
  CHECK(run_cli("frobnicate") == 2);           // unknown subcommand
  CHECK(run_cli("spectrum") == 2);             // missing --config
  CHECK(run_cli("--help") == 0);

  const std::string broken = td.file("broken.json");
  {
    std::ofstream out(broken);
    out << "{ nope";
  }
  CHECK(run_cli("spectrum --config " + broken) == 2);

  // Unknown keys are rejected rather than ignored.
  const std::string stray = td.file("stray.json");
  write_json(stray, json{{"flow", {{"name", "zero"}, {"dim", 2}}},
                         {"cutoff", 2},
                         {"eps", 0.1},
                         {"typo_key", 1},
                         {"out_dir", td.file("out")}});
  CHECK(run_cli("spectrum --config " + stray) == 2);
}

TEST_CASE("growth-exponent runs are exact for the zero flow and "
          "deterministic byte for byte") {
  TempDir td("lyap");
  fs::create_directories(td.file("a"));
  fs::create_directories(td.file("b"));
  const std::string cfg = td.file("lyap.json");
  write_json(cfg, json{{"flow", {{"name", "zero"}, {"dim", 2}}},
                       {"samples", 4},
                       {"horizon", 5.0},
                       {"seed", 11},
                       {"out_dir", td.file("a")}});
  REQUIRE(run_cli("lyapunov --config " + cfg) == 0);

  const json m = read_json(td.file("a") + "/lyapunov.json");
  CHECK(m.at("command") == "lyapunov");
  CHECK(m.at("flow") == "zero");
  CHECK(m.at("mu").get<double>() == 0.0);  // nothing stretches
  CHECK(m.at("confidence_halfwidth").get<double>() == 0.0);
  CHECK(m.at("samples") == 4);
  CHECK(m.at("horizon") == 5.0);
  CHECK(m.at("weight_m") == 0);

  const auto lines = csv_lines(td.file("a") + "/lyapunov_samples.csv");
  REQUIRE(lines.size() == 5);  // header + one row per sample
  CHECK(lines[0] == "sample,rate,x0_1,x0_2,xi0_1,xi0_2");

  // Same config, second directory: identical sample table.
  REQUIRE(run_cli("lyapunov --config " + cfg + " --out " + td.file("b")) ==
          0);
  CHECK(slurp(td.file("a") + "/lyapunov_samples.csv") ==
        slurp(td.file("b") + "/lyapunov_samples.csv"));
}

TEST_CASE("spectrum runs write the sorted eigenvalue table") {
  TempDir td("spec");
  const std::string cfg = td.file("spec.json");
  write_json(cfg, json{{"flow", {{"name", "zero"}, {"dim", 2}}},
                       {"cutoff", 2},
                       {"eps", 0.1},
                       {"out_dir", td.path.string()}});
  REQUIRE(run_cli("spectrum --config " + cfg) == 0);

  const auto lines = csv_lines(td.file("spectrum.csv"));
  REQUIRE(lines.size() == 25);  // header + 24 coefficients at cutoff 2
  CHECK(lines[0] == "index,re,im,residual");
  // Leading shell comes first: index 0, re -0.1 up to solver roundoff.
  std::istringstream first(lines[1]);
  std::string cell;
  std::getline(first, cell, ',');
  CHECK(cell == "0");
  std::getline(first, cell, ',');
  CHECK(std::stod(cell) == doctest::Approx(-0.1).epsilon(1e-10));

  const json m = read_json(td.file("spectrum.json"));
  CHECK(m.at("command") == "spectrum");
  CHECK(m.at("config").at("cutoff") == 2);
}

TEST_CASE("branch exits with the empty-hypothesis code when no eigenvalue "
          "clears the threshold") {
  TempDir td("branch");
  const std::string cfg = td.file("branch.json");
  write_json(cfg, json{{"flow", {{"name", "zero"}, {"dim", 2}}},
                       {"cutoff", 2},
                       {"eps_grid", {0.1, 0.01}},
                       {"mu_hat", 0.0},
                       {"delta_margin", 0.05},
                       {"contour", {{"radius", 0.02}, {"nodes", 32}}},
                       {"out_dir", td.path.string()}});
  CHECK(run_cli("branch --config " + cfg) == 4);
}

TEST_CASE("contour projection run reports the shell trace") {
  TempDir td("riesz");
  const std::string cfg = td.file("riesz.json");
  write_json(cfg,
             json{{"flow", {{"name", "zero"}, {"dim", 2}}},
                  {"cutoff", 4},
                  {"eps", 0.1},
                  {"contour",
                   {{"center", {-0.1, 0.0}}, {"radius", 0.04}, {"nodes", 64}}},
                  {"out_dir", td.path.string()}});
  REQUIRE(run_cli("riesz --config " + cfg) == 0);

  const json m = read_json(td.file("riesz.json"));
  CHECK(m.at("command") == "riesz");
  REQUIRE(m.at("trace").size() == 2);
  CHECK(std::abs(m.at("trace")[0].get<double>() - 4.0) <= 1e-8);
  CHECK(std::abs(m.at("trace")[1].get<double>()) <= 1e-10);
  CHECK(m.at("multiplicity") == 4);
}

TEST_CASE("packet runs tabulate both residuals") {
  TempDir td("packet");
  const std::string cfg = td.file("packet.json");
  write_json(cfg,
             json{{"flow", {{"name", "zero"}, {"dim", 2}}},
                  {"packet",
                   {{"deltas", {0.25}},
                    {"eps", {0.01}},
                    {"t", 0.5},
                    {"xi0", {1.0, 0.0}}}},
                  {"out_dir", td.path.string()}});
  REQUIRE(run_cli("packet --config " + cfg) == 0);

  const auto lines = csv_lines(td.file("packet.csv"));
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "delta,eps,r_asym,r_decomp");
  CHECK(lines[1].rfind("0.25,0.01,", 0) == 0);

  const json m = read_json(td.file("packet.json"));
  REQUIRE(m.at("rows").size() == 1);
  // The zero flow transports nothing: both residuals are at roundoff.
  CHECK(m.at("rows")[0].at("r_asym").get<double>() <= 1e-10);
  CHECK(m.at("rows")[0].at("r_decomp").get<double>() <= 1e-10);
  CHECK(m.at("fit").is_null());  // too few rows for the two-scale fit
}

TEST_CASE("report merges manifests and rejects directories without any") {
  TempDir td("report");
  CHECK(run_cli("report --out " + td.path.string()) == 2);  // nothing to do
  CHECK(run_cli("report") == 2);                            // no directory

  const std::string cfg = td.file("lyap.json");
  write_json(cfg, json{{"flow", {{"name", "zero"}, {"dim", 2}}},
                       {"samples", 2},
                       {"horizon", 2.0},
                       {"out_dir", td.path.string()}});
  REQUIRE(run_cli("lyapunov --config " + cfg) == 0);
  // The config file itself is not a manifest: the scan must reject the
  // directory while it contains non-manifest JSON.
  CHECK(run_cli("report --out " + td.path.string()) == 2);
  fs::remove(cfg);

  REQUIRE(run_cli("report --out " + td.path.string()) == 0);
  const json rep = read_json(td.file("report.json"));
  CHECK(rep.at("command") == "report");
  REQUIRE(rep.at("sections").contains("lyapunov"));
  CHECK(rep.at("sections").at("lyapunov").size() == 1);
  CHECK(rep.at("sections").at("lyapunov")[0].at("manifest_file") ==
        "lyapunov.json");
  CHECK(rep.at("warnings").empty());

  // A second invocation ignores its own previous output and still succeeds.
  CHECK(run_cli("report --out " + td.path.string()) == 0);
}
