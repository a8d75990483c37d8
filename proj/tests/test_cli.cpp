#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "zimed/report.hpp"

namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out = fs::temp_directory_path() / ("zimed_cli_" + std::to_string(counter++) + ".out");
  const std::string cmd = std::string(ZIMED_CLI_PATH) + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out);
  std::stringstream buf;
  buf << in.rdbuf();
  fs::remove(out);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, buf.str()};
}

const std::string kFixture = std::string(ZIMED_TEST_DATA) + "/zip_fixture.csv";

}  // namespace

TEST(Cli, FitFixtureChoosesZip) {
  const CliRun r = run_cli("fit --input " + kFixture + " --output json --seed 7");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = zimed::Json::parse(r.out);
  EXPECT_EQ(j["report"], "fit");
  EXPECT_EQ(j["schema_version"], zimed::kReportSchemaVersion);
  EXPECT_EQ(j["selection"]["chosen"], "ZIP");
  EXPECT_EQ(j["selection"]["candidates"].size(), 3u);
  EXPECT_EQ(j["exit_code"], 0);
  ASSERT_EQ(j["effects"].size(), 5u);
  EXPECT_EQ(j["effects"][2]["effect"], "NIE");
}

TEST(Cli, JsonIsByteIdenticalAcrossRuns) {
  const std::string args = "fit --input " + kFixture + " --output json --seed 7";
  const CliRun a = run_cli(args), b = run_cli(args);
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const std::string sim = "simulate --scenario zip-70 --reps 2 --n 200 --output json --seed 11";
  const CliRun c = run_cli(sim), d = run_cli(sim);
  EXPECT_EQ(c.code, 0);
  EXPECT_FALSE(c.out.empty());
  EXPECT_EQ(c.out, d.out);
}

TEST(Cli, MissingColumnExitsWithUsageCode) {
  const CliRun r = run_cli("fit --input " + kFixture + " --m abundance --output json");
  EXPECT_EQ(r.code, 2);
  const auto j = zimed::Json::parse(r.out);
  EXPECT_NE(j["error"]["message"].get<std::string>().find("abundance"), std::string::npos);
}

TEST(Cli, UsageAndIngestionErrors) {
  EXPECT_EQ(run_cli("fit").code, 2);
  EXPECT_EQ(run_cli("fit --input " + kFixture + " --family gamma").code, 2);
  EXPECT_EQ(run_cli("fit --input /nonexistent.csv").code, 3);
  EXPECT_EQ(run_cli("simulate --scenario nope-10").code, 3);
}

TEST(Cli, TableOutputAndPresetList) {
  const CliRun t = run_cli("fit --input " + kFixture + " --family zip");
  EXPECT_EQ(t.code, 0);
  EXPECT_NE(t.out.find("NIE"), std::string::npos);
  const CliRun l = run_cli("simulate --list");
  EXPECT_EQ(l.code, 0);
  EXPECT_NE(l.out.find("zinb-30"), std::string::npos);
}
