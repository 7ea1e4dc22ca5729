#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct CmdResult {
  int code;
  std::string out;
};

CmdResult run(const std::string& args) {
  const std::string cmd = std::string(KFUNC_EXE) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, {}};
  std::string out;
  std::array<char, 4096> buf{};
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string fixture(const char* name) { return std::string(KFUNC_FIXTURES) + "/" + name; }

std::string tmp(const std::string& name) { return ::testing::TempDir() + "kfunc_cli_" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Cli, VerifyDefaultConfigPasses) {
  const CmdResult r = run("--config " + fixture("default.ini") + " verify");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("identities passed"), std::string::npos);
}

TEST(Cli, ZeroKIsAConfigError) {
  const CmdResult r = run("--config " + fixture("zero_k.ini") + " verify");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("ZeroK"), std::string::npos) << r.out;
}

TEST(Cli, NonInvertibleConstraintFailsVerify) {
  const CmdResult r = run("--config " + fixture("even_square.ini") + " verify");
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_NE(r.out.find("FAIL  scenario-constraint-invertibility"), std::string::npos) << r.out;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("bogus").code, 2);
  EXPECT_EQ(run("--grid-n x verify").code, 2);
  EXPECT_EQ(run("--config /nonexistent/file.ini verify").code, 2);
  EXPECT_EQ(run("--config " + fixture("malformed.ini") + " verify").code, 2);
  EXPECT_EQ(run("--unknown.key=3 deriv").code, 2);
  EXPECT_EQ(run("--grid.n").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, DerivClosedForm) {
  const std::string out = tmp("deriv.csv");
  ASSERT_EQ(run("--config " + fixture("default.ini") + " --out " + out + " deriv --split").code, 0);
  const auto rows = csv_rows(slurp(out));
  ASSERT_EQ(rows.size(), 201u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"x", "rho", "grad", "k_deriv", "n_part", "shape_part"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double x = std::stod(rows[i][0]);
    EXPECT_NEAR(std::stod(rows[i][3]), 2 * x - 7.0 / 6, 1e-4);
    EXPECT_EQ(rows[i][3], rows[i][4]);
  }
}

TEST(Cli, DerivOfConstraintFunctionalVanishes) {
  const CmdResult r = run("--functional.name=of_k --functional.b=sin --constraint.name=exp deriv");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rows = csv_rows(r.out);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(std::abs(std::stod(rows[i][3])), 1e-10);
}

TEST(Cli, DerivPointWeightZeroesRowZero) {
  const CmdResult r = run("--seed 3 --field.rho=random deriv --weight point:0");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(std::stod(csv_rows(r.out)[1][3]), 0.0);
}

TEST(Cli, DerivReportsNodeOfDomainViolation) {
  const CmdResult r = run("--constraint.name=power --field.rho=affine:1,-0.5 --constraint.K=1 deriv");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("DomainViolation"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("node 0"), std::string::npos) << r.out;
}

TEST(Cli, GateauxMinusOneOverPi) {
  const CmdResult r = run("--config " + fixture("default.ini") + " gateaux");
  ASSERT_EQ(r.code, 0) << r.out;
  bool found = false;
  for (const auto& row : csv_rows(r.out))
    if (row.size() == 3 && row[0] == "extrapolated") {
      EXPECT_NEAR(std::stod(row[2]), -1.0 / std::numbers::pi, 1e-4);
      found = true;
    }
  EXPECT_TRUE(found) << r.out;
}

TEST(Cli, GateauxZeroDirectionAndNonConvergence) {
  const CmdResult zero = run("--field.delta=constant:0 gateaux");
  ASSERT_EQ(zero.code, 0);
  EXPECT_NE(zero.out.find("extrapolated,,0\n"), std::string::npos) << zero.out;
  const CmdResult nc = run("--functional.name=gradient_square --gateaux.tol=1e-17 gateaux");
  EXPECT_EQ(nc.code, 1);
  EXPECT_NE(nc.out.find("NotConverged"), std::string::npos) << nc.out;
}

TEST(Cli, FlowTraceAndPlot) {
  const std::string out = tmp("flow.csv"), svg = tmp("flow.svg");
  const CmdResult r = run("--out " + out + " flow --plot " + svg);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("Converged"), std::string::npos);
  const auto rows = csv_rows(slurp(out));
  EXPECT_EQ(rows[0], (std::vector<std::string>{"iter", "energy", "K", "residual", "eta"}));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_NEAR(std::stod(rows[i][2]), 1.0, 1e-10);
  const std::string plot = slurp(svg);
  EXPECT_EQ(plot.rfind("<svg", 0), 0u);
  EXPECT_NE(plot.find("<polyline"), std::string::npos);
}

TEST(Cli, FlowStartAtMinimizerAndUnboundedFunctional) {
  const CmdResult at_min = run("--field.rho=constant:1 flow");
  EXPECT_EQ(at_min.code, 0);
  EXPECT_EQ(csv_rows(at_min.out).size(), 3u) << at_min.out;  // header, row 0, status line
  const CmdResult lin = run("--functional.name=linear --flow.max_iters=500 flow");
  EXPECT_EQ(lin.code, 1);
  EXPECT_TRUE(lin.out.find("MaxIters") != std::string::npos ||
              lin.out.find("StepUnderflow") != std::string::npos)
      << lin.out;
}

TEST(Cli, FlagsOverrideConfigFile) {
  const CmdResult r = run("--config " + fixture("default.ini") + " --grid-n 10 --grid.length=2 --constraint.K=auto deriv");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_DOUBLE_EQ(std::stod(rows[1][0]), 0.1);
}

TEST(Cli, CsvOutputIsByteStable) {
  for (const char* cmd : {"verify", "deriv --split", "gateaux", "flow"}) {
    const std::string a = tmp("stable_a.csv"), b = tmp("stable_b.csv");
    const std::string base = "--seed 11 --field.rho=random ";
    run(base + "--out " + a + " " + cmd);
    run(base + "--out " + b + " " + cmd);
    const std::string sa = slurp(a);
    EXPECT_FALSE(sa.empty()) << cmd;
    EXPECT_EQ(sa, slurp(b)) << cmd;
  }
}
