#include "ifl/datagen.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ifl/domain_json.hpp"
#include "ifl/error.hpp"
#include "ifl/qoi.hpp"
#include "ifl/rng.hpp"

namespace ifl {

void validate(const ConditionProfile& p) {
  if (p.trueWeights.empty()) fail(ErrorCode::ValidationFailed, p.name, "profile needs at least one weight");
  for (const double w : p.trueWeights)
    if (!std::isfinite(w)) fail(ErrorCode::ValidationFailed, p.name, "weights must be finite");
  if (!std::isfinite(p.trueBias)) fail(ErrorCode::ValidationFailed, p.name, "bias must be finite");
  if (!(p.noiseSigma >= 0.0) || !std::isfinite(p.noiseSigma)) fail(ErrorCode::ValidationFailed, p.name, "noiseSigma must be >= 0");
  if (!(p.inputLow < p.inputHigh) || !std::isfinite(p.inputLow) || !std::isfinite(p.inputHigh))
    fail(ErrorCode::ValidationFailed, p.name, "inputLow must be below inputHigh");
  if (!(p.badCodeRate >= 0.0) || !(p.uncertainCodeRate >= 0.0) || p.badCodeRate + p.uncertainCodeRate > 1.0)
    fail(ErrorCode::ValidationFailed, p.name, "code rates must be fractions summing to at most 1");
}

void validate(const ScenarioSpec& spec) {
  if (spec.profiles.empty()) fail(ErrorCode::ValidationFailed, spec.id, "scenario needs at least one profile");
  if (spec.clientsPerProfile < 1) fail(ErrorCode::ValidationFailed, spec.id, "clientsPerProfile must be >= 1");
  if (spec.samplesPerClient < 5) fail(ErrorCode::ValidationFailed, spec.id, "samplesPerClient must be >= 5");
  if (spec.processingTicks < 1) fail(ErrorCode::ValidationFailed, spec.id, "processingTicks must be >= 1");
  std::set<std::string> names;
  for (const auto& p : spec.profiles) {
    validate(p);
    if (!names.insert(p.name).second) fail(ErrorCode::ValidationFailed, p.name, "duplicate profile name");
    if (p.trueWeights.size() != spec.profiles.front().trueWeights.size())
      fail(ErrorCode::ValidationFailed, p.name, "all profiles must share one input dimension");
  }
  if (spec.aspectType) {
    validate(*spec.aspectType);
    if (spec.aspectType->dimension() != spec.profiles.front().trueWeights.size())
      fail(ErrorCode::ValidationFailed, spec.aspectType->id, "aspect type dimension differs from the profiles");
  }
  if (spec.assetType) {
    validate(*spec.assetType);
    const auto aspectId = spec.aspectType ? spec.aspectType->id : DatasetLayout{}.aspectTypeId;
    if (!spec.assetType->aspectTypeIds.contains(aspectId))
      fail(ErrorCode::ValidationFailed, spec.assetType->id, "asset type does not expose the scenario aspect type");
  }
  if (spec.network.defaultLink) validate(*spec.network.defaultLink);
  for (const auto& l : spec.network.links) validate(l);
  validate(spec.taskConfig);
}

Dataset gen_asset_dataset(const ConditionProfile& profile, std::size_t n, std::uint64_t seed, const DatasetLayout& layout) {
  validate(profile);
  rng::Engine xs(rng::derive_seed(seed, 0, "inputs"));
  rng::Engine noise(rng::derive_seed(seed, 0, "noise"));
  rng::Engine codes(rng::derive_seed(seed, 0, "codes"));
  const std::size_t d = profile.trueWeights.size();

  Dataset ds;
  ds.aspectTypeId = layout.aspectTypeId;
  ds.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.timestamp = static_cast<std::int64_t>(i) * 1000;
    s.values.resize(d);
    double y = profile.trueBias;
    for (std::size_t k = 0; k < d; ++k) {
      s.values[k] = rng::uniform(xs, profile.inputLow, profile.inputHigh);
      y += profile.trueWeights[k] * s.values[k];
    }
    s.target = y + profile.noiseSigma * rng::standard_normal(noise);
    if (layout.qualityCodes) {
      s.qualityCodes.resize(d);
      for (auto& c : s.qualityCodes) {
        const double u = rng::uniform01(codes);
        c = u < profile.badCodeRate ? kQualityBad : u < profile.badCodeRate + profile.uncertainCodeRate ? kQualityUncertain : kQualityGood;
      }
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

namespace {

std::string numbered(const char* prefix, std::size_t i, std::size_t total) {
  const auto width = std::max<std::size_t>(2, fmt::format("{}", total).size());
  return fmt::format("{}{:0{}}", prefix, i, width);
}

AspectType default_aspect_type(std::size_t dim) {
  AspectType at;
  at.id = DatasetLayout{}.aspectTypeId;
  at.name = "Sensor readings";
  Variable v;
  v.name = "x";
  v.unit = "1";
  v.length = static_cast<int>(dim);
  v.qualityCode = true;
  at.variables.push_back(v);
  return at;
}

}  // namespace

World gen_scenario(const ScenarioSpec& spec) {
  validate(spec);
  World w;
  w.scenarioId = spec.id;
  const auto dim = spec.profiles.front().trueWeights.size();
  w.aspectType = spec.aspectType.value_or(default_aspect_type(dim));
  if (spec.assetType) {
    w.assetType = *spec.assetType;
  } else {
    w.assetType.id = "machine";
    w.assetType.name = "Machine";
    w.assetType.aspectTypeIds = {w.aspectType.id};
  }
  w.modelSpec = MLModelSpec{fmt::format("linreg-{}", dim), Algorithm::LinearRegressionGD, static_cast<int>(dim), w.aspectType.id};
  validate(w.modelSpec, w.aspectType);
  w.taskConfig = spec.taskConfig;
  w.criteria = spec.criteria;
  w.network = Network(spec.network.defaultLink);
  for (const auto& l : spec.network.links) w.network.add_link(l);

  const DatasetLayout layout{w.aspectType.id, w.aspectType.carries_quality_codes()};
  const std::size_t total = spec.profiles.size() * static_cast<std::size_t>(spec.clientsPerProfile);
  std::size_t index = 0;
  for (const auto& profile : spec.profiles) {
    for (int j = 0; j < spec.clientsPerProfile; ++j, ++index) {
      const auto n = index + 1;
      ClientRecord c;
      c.profile = profile.name;
      c.processingTicks = spec.processingTicks;
      auto& reg = c.registration;
      reg.organization = Organization{numbered("org", n, total), fmt::format("Plant {}", n), spec.industry};
      EdgeDevice dev;
      dev.id = numbered("dev", n, total);
      dev.organizationId = reg.organization.id;
      dev.location = fmt::format("site-{}", n);
      dev.hwConfig = HwConfig{4, 4096};
      reg.devices.push_back(dev);
      Asset asset;
      asset.id = numbered("asset", n, total);
      asset.assetTypeId = w.assetType.id;
      asset.location = dev.location;
      asset.envDescription = profile.name;
      asset.edgeDeviceId = dev.id;
      reg.assets.push_back(asset);
      reg.assetTypes.push_back(w.assetType);
      reg.aspectTypes.push_back(w.aspectType);

      c.task = FLTask{numbered("task", n, total), reg.organization.id, w.modelSpec.id, asset.id, TaskKind::Training, spec.taskConfig};
      c.dataset = gen_asset_dataset(profile, static_cast<std::size_t>(spec.samplesPerClient), rng::derive_seed(spec.seed, index, "dataset"),
                                    layout);
      w.groundTruth[c.task.id] = profile.name;
      w.clients.push_back(std::move(c));
    }
  }
  for (const auto& c : w.clients)
    if (!w.network.has_link(c.registration.organization.id, kServerNode) && !w.network.default_link())
      fail(ErrorCode::ValidationFailed, c.registration.organization.id, "no network link to the server");
  return w;
}

std::vector<std::string> preset_names() { return {"single-profile", "three-cohort", "two-cohort"}; }

std::optional<ScenarioSpec> preset(const std::string& name, std::uint64_t seed) {
  ScenarioSpec s;
  s.id = name;
  s.seed = seed;
  s.network.defaultLink = LinkSpec{"*", "*", 5, 2, 8};
  s.taskConfig.learningRate = 0.1;
  s.taskConfig.localEpochs = 5;
  s.taskConfig.maxRounds = 50;
  s.taskConfig.convergenceEps = 1e-8;
  if (name == "two-cohort") {
    s.profiles = {ConditionProfile{"A", {1.0}, 0.0, 0.1, -1.0, 1.0, 0.0, 0.0}, ConditionProfile{"B", {-1.0}, 0.0, 0.1, -1.0, 1.0, 0.0, 0.0}};
    s.clientsPerProfile = 4;
    s.samplesPerClient = 200;
  } else if (name == "three-cohort") {
    s.profiles = {ConditionProfile{"A", {1.5, 0.5}, 0.2, 0.1, -1.0, 1.0, 0.0, 0.0},
                  ConditionProfile{"B", {0.0, -1.0}, 0.0, 0.1, -1.0, 1.0, 0.0, 0.0},
                  ConditionProfile{"C", {-1.5, 0.5}, -0.2, 0.1, -1.0, 1.0, 0.0, 0.0}};
    s.clientsPerProfile = 3;
    s.samplesPerClient = 200;
  } else if (name == "single-profile") {
    s.profiles = {ConditionProfile{"A", {0.8, -0.5}, 0.3, 0.05, -1.0, 1.0, 0.05, 0.05}};
    s.clientsPerProfile = 4;
    s.samplesPerClient = 150;
  } else {
    return std::nullopt;
  }
  return s;
}

void to_json(nlohmann::json& j, const ConditionProfile& p) {
  j = {{"name", p.name},           {"trueWeights", p.trueWeights}, {"trueBias", p.trueBias},
       {"noiseSigma", p.noiseSigma}, {"inputLow", p.inputLow},       {"inputHigh", p.inputHigh},
       {"badCodeRate", p.badCodeRate}, {"uncertainCodeRate", p.uncertainCodeRate}};
}

void from_json(const nlohmann::json& j, ConditionProfile& p) {
  const ConditionProfile d;
  p.name = j.at("name").get<std::string>();
  p.trueWeights = j.at("trueWeights").get<std::vector<double>>();
  p.trueBias = value_or(j, "trueBias", d.trueBias);
  p.noiseSigma = value_or(j, "noiseSigma", d.noiseSigma);
  p.inputLow = value_or(j, "inputLow", d.inputLow);
  p.inputHigh = value_or(j, "inputHigh", d.inputHigh);
  p.badCodeRate = value_or(j, "badCodeRate", d.badCodeRate);
  p.uncertainCodeRate = value_or(j, "uncertainCodeRate", d.uncertainCodeRate);
  validate(p);
}

void to_json(nlohmann::json& j, const ScenarioSpec& s) {
  j = {{"id", s.id},
       {"seed", s.seed},
       {"profiles", s.profiles},
       {"clientsPerProfile", s.clientsPerProfile},
       {"samplesPerClient", s.samplesPerClient},
       {"industry", s.industry},
       {"taskConfig", s.taskConfig},
       {"processingTicks", s.processingTicks},
       {"criteria", s.criteria}};
  put_optional(j, "aspectType", s.aspectType);
  put_optional(j, "assetType", s.assetType);
  auto& net = j["network"];
  net = {{"links", s.network.links}};
  put_optional(net, "default", s.network.defaultLink);
}

void from_json(const nlohmann::json& j, ScenarioSpec& s) {
  const ScenarioSpec d;
  s.id = value_or(j, "id", d.id);
  s.seed = value_or(j, "seed", d.seed);
  s.profiles = j.at("profiles").get<std::vector<ConditionProfile>>();
  s.clientsPerProfile = value_or(j, "clientsPerProfile", d.clientsPerProfile);
  s.samplesPerClient = value_or(j, "samplesPerClient", d.samplesPerClient);
  s.industry = value_or(j, "industry", d.industry);
  s.aspectType = get_optional<AspectType>(j, "aspectType");
  s.assetType = get_optional<AssetType>(j, "assetType");
  s.taskConfig = value_or(j, "taskConfig", d.taskConfig);
  s.processingTicks = value_or(j, "processingTicks", d.processingTicks);
  s.criteria = value_or(j, "criteria", d.criteria);
  s.network = {};
  if (const auto it = j.find("network"); it != j.end()) {
    s.network.defaultLink = get_optional<LinkSpec>(*it, "default");
    s.network.links = value_or(*it, "links", std::vector<LinkSpec>{});
  }
  validate(s);
}

nlohmann::json to_json(const World& w) {
  nlohmann::json clients = nlohmann::json::array();
  for (const auto& c : w.clients)
    clients.push_back({{"registration", c.registration},
                       {"task", c.task},
                       {"profile", c.profile},
                       {"processingTicks", c.processingTicks},
                       {"dataset", c.dataset}});
  return {{"scenarioId", w.scenarioId}, {"aspectType", w.aspectType}, {"assetType", w.assetType},
          {"modelSpec", w.modelSpec},   {"taskConfig", w.taskConfig}, {"criteria", w.criteria},
          {"links", w.network.links()}, {"groundTruth", w.groundTruth}, {"clients", clients}};
}

}  // namespace ifl
