#include "ifl/simulation.hpp"

#include <fstream>
#include <memory>
#include <sstream>

#include "ifl/domain_json.hpp"
#include "ifl/error.hpp"
#include "ifl/rng.hpp"

namespace ifl {

void to_json(nlohmann::json& j, const ScenarioFile& f) { j = {{"scenario", f.scenario}, {"settings", f.settings}}; }

void from_json(const nlohmann::json& j, ScenarioFile& f) {
  f.scenario = j.at("scenario").get<ScenarioSpec>();
  f.settings = value_or(j, "settings", RunSettings{});
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::UnresolvedReference, path.string(), "cannot open file");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ValidationFailed, path.string(), e.what());
  }
}

void apply_override(nlohmann::json& file, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) fail(ErrorCode::ValidationFailed, assignment, "expected key=value");
  std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  std::vector<std::string> path;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) fail(ErrorCode::ValidationFailed, assignment, "empty path segment");
    path.push_back(part);
  }
  if (path.front() != "scenario" && path.front() != "settings") path.insert(path.begin(), "settings");

  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    value = raw;
  }
  nlohmann::json* node = &file;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!node->is_object() && !node->is_null()) fail(ErrorCode::ValidationFailed, assignment, "path runs through a non-object");
    node = &(*node)[path[i]];
  }
  if (!node->is_object() && !node->is_null()) fail(ErrorCode::ValidationFailed, assignment, "path runs through a non-object");
  (*node)[path.back()] = std::move(value);
}

RunReport run_scenario(const ScenarioFile& file, const RunOptions& options) {
  auto spec = file.scenario;
  if (options.seed) spec.seed = *options.seed;
  auto settings = file.settings;
  if (options.cohorts) settings.cohortsEnabled = *options.cohorts;
  if (options.jobs) settings.jobs = *options.jobs;
  validate(settings);

  auto world = gen_scenario(spec);
  auto catalog = options.catalogPath ? std::make_unique<Catalog>(*options.catalogPath) : std::make_unique<Catalog>();
  for (const auto& c : world.clients) catalog->register_client(c.registration);
  catalog->register_model_spec(world.modelSpec);
  for (const auto& cr : world.criteria) catalog->post_search_criteria(cr);

  std::vector<std::unique_ptr<FLClient>> clients;
  for (auto& c : world.clients) {
    clients.push_back(std::make_unique<FLClient>(c.registration.organization.id, world.aspectType, settings.nRef));
    clients.back()->attach(c.task.id, std::move(c.dataset));
  }

  Orchestrator server(*catalog, world.network, settings, rng::derive_seed(spec.seed, 0, "server"));
  for (auto& c : clients) server.connect(*c);
  for (const auto& c : world.clients) {
    server.submit_task(c.task);
    server.set_processing_ticks(c.task.id, c.processingTicks);
  }

  auto cfg = world.taskConfig;
  if (options.mode) cfg.mode = *options.mode;
  const int rounds = options.rounds.value_or(cfg.maxRounds);

  const auto keys = server.populations();
  if (keys.size() != 1) fail(ErrorCode::ValidationFailed, spec.id, "scenario must form exactly one population");
  auto report = server.run_training(keys.front(), cfg, rounds);
  report.scenarioId = spec.id;
  report.groundTruth = world.groundTruth;
  return report;
}

}  // namespace ifl
