#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "nwl/io.hpp"
#include "support/schema.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kSource = NWL_SOURCE_DIR;

fs::path out_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("nwl_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(d);
  return d;
}

std::string config(const std::string& name) { return (kSource / "configs" / name).string(); }

int run(const std::string& args) {
  const std::string cmd = "env -u NWL_OUT " + std::string(NWL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void expect_valid(const fs::path& report, const std::string& schema_name) {
  ASSERT_TRUE(fs::exists(report)) << report;
  const auto doc = nwl::read_json(report);
  const auto schema = nwl::read_json(kSource / "schemas" / (schema_name + ".schema.json"));
  const auto errors = nwl_test::validate(doc, schema);
  for (const auto& e : errors) ADD_FAILURE() << report.filename() << ": " << e;
}

}  // namespace

TEST(Cli, SymbolCheck) {
  const auto d = out_dir("sc");
  EXPECT_EQ(run("symbol-check --config " + config("whitham.json") + " --out " + d.string()), 0);
  expect_valid(d / "symbol_check.json", "symbol-check");
  const auto d2 = out_dir("sc_p1");
  EXPECT_EQ(run("symbol-check --config " + config("bessel_p1.json") + " --out " + d2.string()), 1);
  expect_valid(d2 / "symbol_check.json", "symbol-check");
}

TEST(Cli, KernelIsDeterministic) {
  const auto a = out_dir("k1"), b = out_dir("k2");
  for (const auto& d : {a, b})
    EXPECT_EQ(run("kernel --origin --config " + config("fkdv_m1.json") + " --n 128 --seed 3 --out " + d.string()), 0);
  expect_valid(a / "kernel.json", "kernel");
  EXPECT_EQ(nwl::strip_timestamps(nwl::read_json(a / "kernel.json")).dump(),
            nwl::strip_timestamps(nwl::read_json(b / "kernel.json")).dump());
  EXPECT_EQ(nwl::read_text(a / "kernel.csv"), nwl::read_text(b / "kernel.csv"));
}

TEST(Cli, SolveSymmetryVerifyEvolve) {
  const auto d = out_dir("pipeline");
  const std::string out = " --out " + d.string();
  ASSERT_EQ(run("solve --config " + config("whitham.json") + " --n 128" + out), 0);
  expect_valid(d / "solve.json", "solve");
  const std::string prof = " --profile " + (d / "profile.csv").string() + " --manifest " + (d / "solve.json").string();
  EXPECT_EQ(run("symmetry" + prof + out), 0);
  expect_valid(d / "symmetry.json", "symmetry");
  EXPECT_EQ(nwl::read_json(d / "symmetry.json")["result"]["status"], "theorem_confirmed");
  EXPECT_EQ(run("verify touching --lambda -0.3 --xbar 1.0" + prof + out), 0);
  expect_valid(d / "verify_touching.json", "verify-touching");
  EXPECT_EQ(run("verify boundary --lambda 0 --shift 0.2 --n 512" + prof + out), 0);
  expect_valid(d / "verify_boundary.json", "verify-boundary");
  EXPECT_EQ(nwl::read_json(d / "verify_boundary.json")["result"]["verdict"], "positive");
  EXPECT_EQ(run("evolve --periods 1 --snapshot-stride 100" + prof + out), 0);
  expect_valid(d / "evolve.json", "evolve");
  EXPECT_TRUE(fs::exists(d / "snapshot_0000.csv"));
}

TEST(Cli, FixedPointConfig) {
  const auto d = out_dir("fp");
  EXPECT_EQ(run("solve --config " + config("whitham_fixed_point.json") + " --out " + d.string()), 0);
  expect_valid(d / "solve.json", "solve");
}

TEST(Cli, BranchTwoRoute) {
  const auto d = out_dir("branch");
  EXPECT_EQ(run("branch --two-route --config " + config("fkdv_m2.json") + " --n 128 --M 200000 --out " + d.string()), 0);
  expect_valid(d / "branch.json", "branch");
  EXPECT_TRUE(fs::exists(d / "branch.csv"));
}

TEST(Cli, AllPipeline) {
  const auto d = out_dir("all");
  EXPECT_EQ(run("all --config " + config("fkdv_m1.json") + " --out " + d.string()), 0);
  expect_valid(d / "all.json", "all");
  EXPECT_TRUE(nwl::read_json(d / "all.json")["result"]["passed"].get<bool>());
}

TEST(Cli, InvalidInputExitCodes) {
  const auto d = out_dir("bad");
  EXPECT_EQ(run("kernel --config /nonexistent/config.json --out " + d.string()), 3);
  EXPECT_EQ(run(""), 3);
  EXPECT_EQ(run("frobnicate"), 3);
  fs::create_directories(d);
  const auto cfg = d / "unknown.json";
  std::ofstream(cfg) << R"({"symbol": {"kind": "nonesuch"}})";
  EXPECT_EQ(run("symbol-check --config " + cfg.string() + " --out " + d.string()), 3);
  std::ofstream(d / "broken.json") << "{";
  EXPECT_EQ(run("symbol-check --config " + (d / "broken.json").string() + " --out " + d.string()), 3);
}

TEST(Cli, OutEnvironmentOverride) {
  const auto d = out_dir("env");
  const std::string cmd = "NWL_OUT=" + d.string() + " " + std::string(NWL_CLI_PATH) + " symbol-check --config " +
                          config("fkdv_m1.json") + " --out /nonexistent_dir_unused > /dev/null 2>&1";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(d / "symbol_check.json"));
}
