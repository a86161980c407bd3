// iflsim: generate scenarios, run federated-learning simulations, summarize
// reports.
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ifl/datagen.hpp"
#include "ifl/error.hpp"
#include "ifl/report.hpp"
#include "ifl/simulation.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("iflsim");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("IFLSIM_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out.flush()) throw std::runtime_error("failed writing " + path.string());
}

struct GenArgs {
  std::string preset;
  std::uint64_t seed = 42;
  std::string output;
};

int cmd_gen(const GenArgs& a) {
  const auto spec = ifl::preset(a.preset, a.seed);
  if (!spec) {
    std::string known;
    for (const auto& n : ifl::preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw UsageError(fmt::format("unknown preset '{}' (known: {})", a.preset, known));
  }
  const nlohmann::json doc = ifl::ScenarioFile{*spec, ifl::RunSettings{}};
  const auto text = doc.dump(2) + "\n";
  if (a.output == "-")
    std::cout << text;
  else
    write_file(a.output, text);
  spdlog::info("wrote preset {} (seed {}) to {}", a.preset, a.seed, a.output);
  return 0;
}

struct RunArgs {
  std::string scenario;
  std::string mode;
  std::optional<int> rounds;
  std::string cohorts;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string outDir = ".";
  std::string name;
  std::string catalog;
};

int cmd_run(const RunArgs& a) {
  auto doc = ifl::read_json_file(a.scenario);
  for (const auto& o : a.overrides) ifl::apply_override(doc, o);
  const auto file = doc.get<ifl::ScenarioFile>();

  ifl::RunOptions options;
  if (a.mode == "sync") options.mode = ifl::SyncMode::Sync;
  if (a.mode == "async") options.mode = ifl::SyncMode::Async;
  if (a.cohorts == "on") options.cohorts = true;
  if (a.cohorts == "off") options.cohorts = false;
  options.rounds = a.rounds;
  options.jobs = a.jobs;
  options.seed = a.seed;
  if (!a.catalog.empty()) options.catalogPath = a.catalog;

  spdlog::info("running {} ({} profiles)", a.scenario, file.scenario.profiles.size());
  const auto report = ifl::run_scenario(file, options);

  const auto name = a.name.empty() ? fs::path(a.scenario).stem().string() : a.name;
  const fs::path dir(a.outDir);
  const nlohmann::json reportJson = report;
  write_file(dir / (name + ".report.json"), reportJson.dump(2) + "\n");
  std::ostringstream csv;
  ifl::write_metrics_csv(csv, report);
  write_file(dir / (name + ".metrics.csv"), csv.str());

  std::cout << fmt::format("{}: {} round records, {} cohort events, stop reason {}\n", name, report.rounds.size(),
                           report.cohortEvents.size(), ifl::to_string(report.stopReason));
  return 0;
}

struct ReportArgs {
  std::string file;
  std::string format = "text";
};

int cmd_report(const ReportArgs& a) {
  const auto doc = ifl::read_json_file(a.file);
  std::cout << (a.format == "csv" ? ifl::summarize_csv(doc) : ifl::summarize_text(doc));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Industrial federated learning simulator"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* genCmd = app.add_subcommand("gen", "Write a scenario file from a preset");
  genCmd->add_option("--preset", gen.preset, "Preset name")->required();
  genCmd->add_option("--seed", gen.seed, "Scenario seed");
  genCmd->add_option("-o,--output", gen.output, "Output path ('-' for stdout)")->required();

  RunArgs run;
  auto* runCmd = app.add_subcommand("run", "Run a scenario and write <name>.report.json and <name>.metrics.csv");
  runCmd->add_option("scenario", run.scenario, "Scenario file")->required();
  runCmd->add_option("--mode", run.mode, "Aggregation mode")->check(CLI::IsMember({"sync", "async"}));
  runCmd->add_option("--rounds", run.rounds, "Maximum rounds")->check(CLI::NonNegativeNumber);
  runCmd->add_option("--cohorts", run.cohorts, "Cohort management")->check(CLI::IsMember({"on", "off"}));
  runCmd->add_option("--jobs", run.jobs, "Parallel client computations")->check(CLI::PositiveNumber);
  runCmd->add_option("--seed", run.seed, "Override the scenario seed");
  runCmd->add_option("--set", run.overrides, "Setting override key=value (dotted path)")
      ->check(CLI::Validator([](std::string& s) { return s.find('=') == std::string::npos ? std::string("expected key=value") : std::string(); },
                             "KEY=VALUE"));
  runCmd->add_option("--out-dir", run.outDir, "Output directory");
  runCmd->add_option("--name", run.name, "Output base name (default: scenario file stem)");
  runCmd->add_option("--catalog", run.catalog, "Persist the client catalog to this file");

  ReportArgs rep;
  auto* repCmd = app.add_subcommand("report", "Summarize a report file");
  repCmd->add_option("file", rep.file, "Report JSON")->required();
  repCmd->add_option("--format", rep.format, "Output format")->check(CLI::IsMember({"text", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*genCmd) return cmd_gen(gen);
    if (*runCmd) return cmd_run(run);
    return cmd_report(rep);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ifl::Error& e) {
    std::cerr << fmt::format("error: {} [{}{}]\n", e.what(), ifl::to_string(e.code()), e.subject().empty() ? "" : ": " + e.subject());
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
