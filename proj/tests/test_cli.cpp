#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = BDGZ_CLI_PATH;
const fs::path kConfigs = BDGZ_CONFIG_DIR;

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path workdir() {
  const fs::path d = fs::temp_directory_path() / ("bdgz_test_cli." + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

CliResult run(const std::string& args, const std::string& env = "") {
  const fs::path out = workdir() / "stdout.txt", err = workdir() / "stderr.txt";
  const std::string cmd = env + " \"" + kCli + "\" " + args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = workdir() / name;
  std::ofstream(p) << text;
  return p;
}

std::string cfg(const std::string& name) { return "--config \"" + (kConfigs / name).string() + "\""; }
std::string at(const fs::path& p) { return "\"" + p.string() + "\""; }

fs::path solved(const std::string& config) {
  const fs::path state = workdir() / (config + ".bdgz");
  const CliResult r = run("solve " + cfg(config) + " --state " + at(state));
  EXPECT_EQ(r.code, 0) << r.err;
  return state;
}

const std::string kSmallBox = R"([grid]
points = 32
lengths = 8.0
[physics]
g = 0.5
N0 = 50
[basis]
f = 9
)";

}  // namespace

TEST(Cli, UsageErrorsExitWithConfigurationCode) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("spectrum").code, 2);
  EXPECT_EQ(run("spectrum --config /nonexistent.toml").code, 2);
  EXPECT_EQ(run("spectrum " + cfg("ideal_gas.toml") + " --format xml").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, BadConfigValueIsReported) {
  const fs::path c = write_file("bad.toml", "[physics]\ng = 1\nN0 = 1\n[grid]\nwidth = 3\n");
  const CliResult r = run("solve --config " + at(c));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("unknown key 'grid.width'"), std::string::npos) << r.err;
}

TEST(Cli, IdealGasSpectrumIsTheOscillatorLadder) {
  const fs::path state = solved("ideal_gas.toml");
  const CliResult r = run("spectrum " + cfg("ideal_gas.toml") + " --state " + at(state) + " --format json");
  ASSERT_EQ(r.code, 0) << r.err;
  const nlohmann::json j = nlohmann::json::parse(r.out);
  const auto& modes = j.at("modes");
  ASSERT_GE(modes.size(), 6u);
  for (int n = 0; n < 6; ++n) EXPECT_NEAR(modes[n].at("omega").get<double>(), n + 1.0, 1e-6);
  EXPECT_EQ(j.at("zero_mode").at("status"), "degenerate");
}

TEST(Cli, OutputIsDeterministicAcrossRunsAndThreadCounts) {
  const fs::path state = solved("harmonic_gn100.toml");
  const std::string args = "spectrum " + cfg("harmonic_gn100.toml") + " --state " + at(state);
  const CliResult a = run(args), b = run(args), c = run(args, "BDGZ_THREADS=1");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  EXPECT_NE(a.out.find("zero_mode=found"), std::string::npos);
}

TEST(Cli, OutFlagWritesFile) {
  const fs::path state = solved("ideal_gas.toml");
  const fs::path out = workdir() / "spectrum.csv";
  fs::remove(out);
  ASSERT_EQ(run("spectrum " + cfg("ideal_gas.toml") + " --state " + at(state) + " --out " + at(out)).code, 0);
  EXPECT_NE(slurp(out).find("mode,omega,eta_norm"), std::string::npos);
}

TEST(Cli, ConvergeReportsDeviationFromDirectSolve) {
  const fs::path state = solved("harmonic_gn100.toml");
  const CliResult r = run("converge " + cfg("harmonic_gn100.toml") + " --state " + at(state) + " --f-list 8,128 --format json");
  ASSERT_EQ(r.code, 0) << r.err;
  const nlohmann::json j = nlohmann::json::parse(r.out);
  double worst_full = 0.0;
  for (const auto& row : j.at("rows"))
    if (row.at("f") == 128)
      for (double d : row.at("relative_deviation").get<std::vector<double>>()) worst_full = std::max(worst_full, d);
  EXPECT_LT(worst_full, 1e-6);
  EXPECT_EQ(run("converge " + cfg("harmonic_gn100.toml") + " --state " + at(state) + " --f-list 8,x").code, 2);
}

TEST(Cli, OracleCheckPassesOnSamples) {
  for (const std::string c : {"homogeneous.toml", "ideal_gas.toml"}) {
    const fs::path state = solved(c);
    const CliResult r = run("oracle-check " + cfg(c) + " --state " + at(state));
    EXPECT_EQ(r.code, 0) << c << ": " << r.err;
    EXPECT_NE(r.out.find("passed=true"), std::string::npos);
  }
}

TEST(Cli, OracleDeviationIsNumericalFailure) {
  const fs::path state = solved("harmonic_gn100.toml");
  const CliResult r = run("oracle-check " + cfg("harmonic_gn100.toml") + " --state " + at(state) + " --f 6");
  EXPECT_EQ(r.code, 5) << r.err;
}

TEST(Cli, UnstableQuadraticFormExitsWithStructureCode) {
  const CliResult r = run("spectrum " + cfg("ideal_gas.toml") + " --debug-quadform " +
                    at(kConfigs / "unstable_quadform.json"));
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("unstable"), std::string::npos);
}

TEST(Cli, MissingZeroModeExitsWithStructureCode) {
  const fs::path q = write_file("no_zero.json", R"({"A": {"rows": 2, "cols": 2, "re": [1, 0, 0, 2], "im": [0, 0, 0, 0]},
                                                    "B": {"rows": 2, "cols": 2, "re": [0, 0, 0, 0], "im": [0, 0, 0, 0]}})");
  const CliResult r = run("spectrum " + cfg("ideal_gas.toml") + " --debug-quadform " + at(q));
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("zero mode missing"), std::string::npos);
}

TEST(Cli, NonConvergenceExitsWithConvergenceCode) {
  const fs::path c = write_file("slow.toml", "[trap]\nkind = \"harmonic\"\n[physics]\ng = 100\nN0 = 1\n[solver]\n"
                                             "max_iterations = 2\ntolerance = 1e-14\n");
  const CliResult r = run("solve --config " + at(c) + " --state " + at(workdir() / "slow.bdgz"));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("last residual"), std::string::npos);
}

TEST(Cli, VacuumTruncationWarningExitCode) {
  const fs::path ok = write_file("box_ok.toml", kSmallBox);
  const fs::path low = write_file("box_low.toml", kSmallBox + "[vacuum]\nzero_mode_n_max = 40\n");
  const fs::path state = workdir() / "box.bdgz";
  ASSERT_EQ(run("solve --config " + at(ok) + " --state " + at(state)).code, 0);
  const CliResult good = run("vacuum --config " + at(ok) + " --state " + at(state));
  EXPECT_EQ(good.code, 0) << good.err;
  EXPECT_NE(good.out.find("phase=real"), std::string::npos);
  const CliResult warn = run("vacuum --config " + at(low) + " --state " + at(state));
  EXPECT_EQ(warn.code, 6);
  EXPECT_NE(warn.err.find("truncation warning"), std::string::npos);
}

TEST(Cli, SnapshotGridMismatchIsConfigurationError) {
  const fs::path state = solved("homogeneous.toml");
  EXPECT_EQ(run("spectrum " + cfg("harmonic_gn100.toml") + " --state " + at(state)).code, 2);
  EXPECT_EQ(run("spectrum " + cfg("ideal_gas.toml") + " --state " + at(workdir() / "missing.bdgz")).code, 2);
}
