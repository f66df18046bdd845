#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

using namespace treebolic;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::main_entry(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

const std::vector<std::string> kModel{"--q", "2", "--p", "2", "--alpha", "1", "--beta", "1"};

std::vector<std::string> cmd(const std::string& name, std::vector<std::string> extra,
                             const std::vector<std::string>& model = kModel) {
  std::vector<std::string> a{name};
  a.insert(a.end(), model.begin(), model.end());
  a.insert(a.end(), extra.begin(), extra.end());
  return a;
}

}  // namespace

TEST(Cli, FormulasCritical) {
  const CliRun r = run({"formulas", "--q", "2", "--p", "2", "--alpha", "1", "--beta", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["closedForms"]["rho"].get<double>(), 1.0);
  EXPECT_EQ(j["closedForms"]["regime"], "critical");
  EXPECT_NEAR(j["closedForms"]["sigma2"].get<double>(), 2.0 / (std::log(2.0) * std::log(2.0)), 1e-12);
}

TEST(Cli, UsageErrorsNameTheFlag) {
  CliRun r = run({"formulas", "--p", "2", "--alpha", "1", "--beta", "0.5"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--q"), std::string::npos) << r.err;
  r = run({"formulas", "--q", "2", "--p", "2.5", "--alpha", "1", "--beta", "0.5"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--p"), std::string::npos) << r.err;
  r = run({"formulas", "--q", "1", "--p", "2", "--alpha", "1", "--beta", "0.5"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--q"), std::string::npos) << r.err;
  r = run({"formulas", "--q", "2", "--p", "2", "--alpha", "1", "--beta", "0"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--beta"), std::string::npos) << r.err;
  r = run(cmd("simulate", {"--dt", "0.5"}));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--dt"), std::string::npos) << r.err;
  r = run(cmd("simulate", {"--paths", "0"}));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--paths"), std::string::npos) << r.err;
  r = run(cmd("simulate", {"--format", "xml"}));
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"verify", "--only", "12"}).code, 1);
  EXPECT_EQ(run(cmd("simulate", {"--out", "/nonexistent/dir/x.csv"})).code, 1);
}

TEST(Cli, BsWordRelation) {
  const CliRun a = run({"bs-word", "--p", "2", "a b"});
  const CliRun b = run({"bs-word", "--p", "2", "b b a"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(run({"bs-word", "--p", "2", "b a"}).out, a.out);
  EXPECT_EQ(run({"bs-word", "--p", "3", "a b"}).out, run({"bs-word", "--p", "3", "b^3 a"}).out);
  EXPECT_EQ(run({"bs-word", "--p", "2", "a c"}).code, 1);
  EXPECT_EQ(run({"bs-word", "--p", "1", "a"}).code, 1);
}

TEST(Cli, SimulateIsByteDeterministic) {
  const fs::path dir = fs::temp_directory_path() / "treebolic_cli_test";
  fs::create_directories(dir);
  const auto f1 = dir / "a.csv", f2 = dir / "b.csv";
  const auto args = [&](const fs::path& f) {
    return cmd("simulate", {"--seed", "7", "--paths", "3", "--horizon", "0.05", "--dt", "1e-3", "--out", f.string()});
  };
  ASSERT_EQ(run(args(f1)).code, 0);
  ASSERT_EQ(run(args(f2)).code, 0);
  const std::string a = slurp(f1);
  EXPECT_EQ(a, slurp(f2));
  std::istringstream in(a);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "path,t,x,Y,vertex,n_t,dist");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3 * 51);
  // A different seed changes the output.
  ASSERT_EQ(run(cmd("simulate", {"--seed", "8", "--paths", "3", "--horizon", "0.05", "--dt", "1e-3", "--out",
                                 f2.string()}))
                .code,
            0);
  EXPECT_NE(a, slurp(f2));
  fs::remove_all(dir);
}

TEST(Cli, SimulateJsonl) {
  const CliRun r = run(cmd("simulate", {"--format", "jsonl", "--horizon", "0.01", "--dt", "1e-3", "--no-dist"}));
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j["dist"].is_null());
    EXPECT_EQ(j["path"], 0);
    EXPECT_NEAR(j["t"].get<double>(), n * 1e-3, 1e-15);
    ++n;
  }
  EXPECT_EQ(n, 11);
}

TEST(Cli, EmitConfig) {
  const CliRun r = run({"--emit-config", "formulas", "--q", "2", "--p", "3", "--alpha", "0.5", "--beta", "1"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j["command"], "formulas");
  EXPECT_EQ(j["params"]["p"], 3);
  const CliRun s = run({"--emit-config", "escape", "--q", "2", "--p", "2", "--alpha", "1", "--beta", "1", "--paths", "2",
                     "--horizon", "0.1"});
  ASSERT_EQ(s.code, 0) << s.err;
  const auto k = nlohmann::json::parse(s.err);
  EXPECT_DOUBLE_EQ(k["dt"].get<double>(), 1e-3);
  EXPECT_EQ(k["paths"], 2);
}

TEST(Cli, Skeleton) {
  const CliRun r = run(cmd("skeleton", {"--steps", "5", "--paths", "2", "--dt", "1e-3"}));
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "path,n,clock,vertex,level");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 12);
  EXPECT_EQ(r.out, run(cmd("skeleton", {"--steps", "5", "--paths", "2", "--dt", "1e-3"})).out);
}

TEST(Cli, Reports) {
  CliRun r = run(cmd("escape", {"--paths", "4", "--horizon", "1"}));
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["seed"], 1);
  EXPECT_EQ(j["distanceRate"]["n"], 4);
  EXPECT_NEAR(j["target"].get<double>(), 0.9618, 1e-4);

  r = run(cmd("clt", {"--paths", "20", "--horizon", "1"}));
  ASSERT_EQ(r.code, 0) << r.err;
  j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j.contains("distance"));
  EXPECT_FALSE(j.contains("driftFree"));

  r = run(cmd("clt", {"--paths", "20", "--horizon", "1", "--limit-samples", "50", "--grid", "1000"},
              {"--q", "2", "--p", "2", "--alpha", "1", "--beta", "0.5"}));
  ASSERT_EQ(r.code, 0) << r.err;
  j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j.contains("driftFree"));
  EXPECT_FALSE(j.contains("distance"));

  r = run(cmd("exit-measure", {"--samples", "200", "--dt", "1e-3", "--x0", "1.5"}));
  ASSERT_EQ(r.code, 0) << r.err;
  j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["histogram"]["samples"], 200);
  EXPECT_EQ(j["histogram"]["lines"].size(), 3u);
  EXPECT_NEAR(j["targets"]["down"].get<double>(), 1.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(j["histogram"]["xLo"].get<double>(), -3.5);

  r = run(cmd("boundary", {"--paths", "30", "--horizon", "2"}));
  ASSERT_EQ(r.code, 0) << r.err;
  j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["regime"], "upward");
  EXPECT_EQ(j["cones"].size(), 6u);

  r = run(cmd("boundary", {"--paths", "30", "--horizon", "2", "--samples", "100", "--oracle-samples", "100"},
              {"--q", "2", "--p", "2", "--alpha", "1", "--beta", "0.25"}));
  ASSERT_EQ(r.code, 0) << r.err;
  j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["regime"], "downward");
  EXPECT_TRUE(j.contains("seriesKs"));

  r = run(cmd("boundary", {"--paths", "30", "--horizon", "2"}, {"--q", "2", "--p", "2", "--alpha", "1", "--beta", "0.5"}));
  ASSERT_EQ(r.code, 0) << r.err;
  j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["regime"], "critical");
  EXPECT_TRUE(j.contains("medianAbsX"));
}

TEST(Cli, VerifyExactCriteria) {
  const CliRun r = run({"verify", "--quick", "--only", "1,8,9"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("criterion  1: PASS"), std::string::npos);
  EXPECT_NE(r.out.find("criterion  8: PASS"), std::string::npos);
  EXPECT_NE(r.out.find("criterion  9: PASS"), std::string::npos);
}

TEST(Cli, RunMapsDomainErrorsToUsage) {
  cli::CliConfig c;
  c.command = "simulate";
  c.model.q = 0.5;  // bypasses parse()
  std::ostringstream out, err;
  EXPECT_EQ(cli::run(c, out, err), 1);
}
