#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int exitCode = -1;
  std::string out;
};

fs::path workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("iflsim_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result iflsim(const std::string& args) {
  const auto outFile = workdir() / "stdout.txt";
  const std::string cmd = std::string("cd ") + workdir().string() + " && " + IFLSIM_PATH + " " + args + " > " + outFile.string() + " 2> " +
                          (workdir() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(outFile)};
}

}  // namespace

TEST(Cli, GenIsDeterministicAndParses) {
  ASSERT_EQ(iflsim("gen --preset two-cohort --seed 42 -o a.json").exitCode, 0);
  ASSERT_EQ(iflsim("gen --preset two-cohort --seed 42 -o b.json").exitCode, 0);
  const auto a = slurp(workdir() / "a.json");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(workdir() / "b.json"));
  const auto doc = nlohmann::json::parse(a);
  EXPECT_TRUE(doc.contains("scenario"));
  EXPECT_EQ(doc["scenario"]["seed"], 42);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(iflsim("gen --preset nope -o x.json").exitCode, 2);
  EXPECT_FALSE(slurp(workdir() / "stderr.txt").empty());
  EXPECT_EQ(iflsim("").exitCode, 2);
  EXPECT_EQ(iflsim("frobnicate").exitCode, 2);
  EXPECT_EQ(iflsim("run a.json --mode sideways").exitCode, 2);
  EXPECT_EQ(iflsim("run a.json --set novalue").exitCode, 2);
}

TEST(Cli, RuntimeErrorsExitOne) {
  EXPECT_EQ(iflsim("run does-not-exist.json").exitCode, 1);
  EXPECT_EQ(iflsim("report does-not-exist.json").exitCode, 1);
}

TEST(Cli, RunZeroRounds) {
  ASSERT_EQ(iflsim("gen --preset two-cohort --seed 42 -o s.json").exitCode, 0);
  ASSERT_EQ(iflsim("run s.json --rounds 0 --name zero").exitCode, 0);
  const auto report = nlohmann::json::parse(slurp(workdir() / "zero.report.json"));
  EXPECT_EQ(report["stopReason"], "MaxRounds");
  EXPECT_TRUE(report["rounds"].empty());
}

TEST(Cli, RerunGivesByteIdenticalCsv) {
  ASSERT_EQ(iflsim("gen --preset two-cohort --seed 42 -o s.json").exitCode, 0);
  ASSERT_EQ(iflsim("run s.json --rounds 12 --name first").exitCode, 0);
  ASSERT_EQ(iflsim("run s.json --rounds 12 --name second --jobs 2").exitCode, 0);
  const auto a = slurp(workdir() / "first.metrics.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(workdir() / "second.metrics.csv"));
  EXPECT_EQ(slurp(workdir() / "first.report.json"), slurp(workdir() / "second.report.json"));
}

TEST(Cli, CohortsOnBeatsOff) {
  ASSERT_EQ(iflsim("gen --preset two-cohort --seed 42 -o s.json").exitCode, 0);
  ASSERT_EQ(iflsim("run s.json --cohorts off --name off").exitCode, 0);
  ASSERT_EQ(iflsim("run s.json --cohorts on --name on").exitCode, 0);
  const auto mean_final = [](const std::string& name) {
    const auto r = nlohmann::json::parse(slurp(workdir() / (name + ".report.json")));
    std::map<std::string, double> last;
    for (const auto& round : r["rounds"])
      for (const auto& t : round["perTask"]) last[t["taskId"]] = t["evalMetrics"]["mse"];
    double sum = 0;
    for (const auto& [t, m] : last) sum += m;
    return sum / static_cast<double>(last.size());
  };
  EXPECT_LT(mean_final("on"), mean_final("off"));
}

TEST(Cli, ReportFormats) {
  ASSERT_EQ(iflsim("gen --preset two-cohort --seed 42 -o s.json").exitCode, 0);
  ASSERT_EQ(iflsim("run s.json --rounds 12 --name rep").exitCode, 0);
  const auto text = iflsim("report rep.report.json");
  EXPECT_EQ(text.exitCode, 0);
  EXPECT_NE(text.out.find("ARI vs ground truth:"), std::string::npos);
  const auto csv = iflsim("report rep.report.json --format csv");
  EXPECT_EQ(csv.exitCode, 0);
  EXPECT_EQ(csv.out.rfind("section,key,field,value", 0), 0u);
  EXPECT_EQ(iflsim("report rep.report.json --format xml").exitCode, 2);
}

TEST(Cli, SettingOverridesApply) {
  ASSERT_EQ(iflsim("gen --preset two-cohort --seed 42 -o s.json").exitCode, 0);
  ASSERT_EQ(iflsim("run s.json --rounds 6 --set cohortsEnabled=false --name noco").exitCode, 0);
  const auto r = nlohmann::json::parse(slurp(workdir() / "noco.report.json"));
  EXPECT_TRUE(r["cohortEvents"].empty());
  EXPECT_EQ(iflsim("run s.json --rounds 6 --set tauMerge=0.9").exitCode, 1);
}
