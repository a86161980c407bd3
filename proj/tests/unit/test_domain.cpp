#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ifl/datagen.hpp"
#include "ifl/domain.hpp"
#include "ifl/domain_json.hpp"

using namespace ifl;

namespace {

class MapResolver : public MetadataResolver {
 public:
  std::map<AssetId, Asset> assets;
  std::map<AssetTypeId, AssetType> types;
  std::map<ModelSpecId, MLModelSpec> specs;
  std::optional<Asset> find_asset(const AssetId& id) const override {
    if (auto it = assets.find(id); it != assets.end()) return it->second;
    return std::nullopt;
  }
  std::optional<AssetType> find_asset_type(const AssetTypeId& id) const override {
    if (auto it = types.find(id); it != types.end()) return it->second;
    return std::nullopt;
  }
  std::optional<MLModelSpec> find_model_spec(const ModelSpecId& id) const override {
    if (auto it = specs.find(id); it != specs.end()) return it->second;
    return std::nullopt;
  }
};

// Two asset types from the reference figure: T1 with aspect E1/E3 models, T2
// with two E2 models.
MapResolver figure_world() {
  MapResolver r;
  r.types["T1"] = fx::asset_type("T1", {"E1", "E3"});
  r.types["T2"] = fx::asset_type("T2", {"E2"});
  r.assets["a1"] = Asset{"a1", "T1", "", "", std::nullopt, "d1"};
  r.assets["a2"] = Asset{"a2", "T1", "", "", std::nullopt, "d2"};
  r.assets["a3"] = Asset{"a3", "T2", "", "", std::nullopt, "d3"};
  r.assets["a4"] = Asset{"a4", "T2", "", "", std::nullopt, "d4"};
  r.specs["M1E1"] = MLModelSpec{"M1E1", Algorithm::LinearRegressionGD, 1, "E1"};
  r.specs["M1E3"] = MLModelSpec{"M1E3", Algorithm::LinearRegressionGD, 1, "E1"};
  r.specs["M21"] = MLModelSpec{"M21", Algorithm::LinearRegressionGD, 1, "E2"};
  r.specs["M22"] = MLModelSpec{"M22", Algorithm::LinearRegressionGD, 2, "E2"};
  return r;
}

FLTask task(const std::string& id, const std::string& asset, const std::string& spec) {
  return FLTask{id, "org", spec, asset, TaskKind::Training, {}};
}

}  // namespace

TEST(PopulationKey, TasksOnSameAssetTypeAndAspectShareKey) {
  const auto r = figure_world();
  EXPECT_EQ(population_key(task("t1", "a3", "M21"), r), population_key(task("t2", "a4", "M22"), r));
}

TEST(PopulationKey, DistinctAssetTypesGiveDistinctKeys) {
  const auto r = figure_world();
  const auto k1 = population_key(task("t1", "a1", "M1E1"), r);
  EXPECT_EQ(k1, population_key(task("t2", "a2", "M1E3"), r));
  EXPECT_NE(k1, population_key(task("t3", "a3", "M21"), r));
}

TEST(PopulationKey, Reflexive) {
  const auto r = figure_world();
  EXPECT_EQ(population_key(task("t1", "a1", "M1E1"), r), population_key(task("t1", "a1", "M1E1"), r));
}

TEST(PopulationKey, UnresolvedReferences) {
  const auto r = figure_world();
  EXPECT_IFL_ERROR(population_key(task("t", "missing", "M21"), r), ErrorCode::UnresolvedReference);
  EXPECT_IFL_ERROR(population_key(task("t", "a3", "missing"), r), ErrorCode::UnresolvedReference);
}

TEST(ValidateHierarchy, EmptyIsOk) { EXPECT_NO_THROW(validate_hierarchy({}, {})); }

TEST(ValidateHierarchy, TwoCycleDetected) {
  std::vector<AssetType> types{fx::asset_type("T", {"E"})};
  types[0].parentTypeId = std::nullopt;
  std::vector<Asset> assets{Asset{"A", "T", "", "", "B", "d"}, Asset{"B", "T", "", "", "A", "d"}};
  EXPECT_IFL_ERROR(validate_hierarchy(assets, types), ErrorCode::CycleDetected);
}

TEST(ValidateHierarchy, ShopFloorLineMachineChain) {
  auto floor = fx::asset_type("floor", {"E"});
  auto line = fx::asset_type("line", {"E"});
  line.parentTypeId = "floor";
  auto machine = fx::asset_type("machine", {"E"});
  machine.parentTypeId = "line";
  std::vector<AssetType> types{floor, line, machine};
  std::vector<Asset> assets{Asset{"f", "floor", "", "", std::nullopt, "d"}, Asset{"l", "line", "", "", "f", "d"},
                            Asset{"m", "machine", "", "", "l", "d"}};
  EXPECT_NO_THROW(validate_hierarchy(assets, types));

  assets[2].parentAssetId = "f";  // machine directly under the floor
  EXPECT_IFL_ERROR(validate_hierarchy(assets, types), ErrorCode::TypeMismatch);
}

TEST(ValidateHierarchy, TypeCycleDetected) {
  auto a = fx::asset_type("a", {"E"});
  auto b = fx::asset_type("b", {"E"});
  a.parentTypeId = "b";
  b.parentTypeId = "a";
  std::vector<AssetType> types{a, b};
  EXPECT_IFL_ERROR(validate_hierarchy({}, types), ErrorCode::CycleDetected);
}

TEST(DatasetConforms, LengthAndTimestamps) {
  const auto at = fx::aspect("readings", 3, false);
  auto ds = fx::dataset({{1, 2, 3}}, {0});
  EXPECT_NO_THROW(dataset_conforms(ds, at));
  ds.samples[0].values = {1, 2};
  EXPECT_IFL_ERROR(dataset_conforms(ds, at), ErrorCode::SchemaMismatch);

  auto dup = fx::dataset({{1, 2, 3}, {1, 2, 3}}, {0, 0});
  dup.samples[0].timestamp = dup.samples[1].timestamp = 5;
  try {
    dataset_conforms(dup, at);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaMismatch);
    EXPECT_EQ(e.subject(), "1");
  }
}

TEST(DatasetConforms, QualityCodesMustAlign) {
  const auto at = fx::aspect("readings", 2, true);
  auto ds = fx::dataset({{1, 2}}, {0}, true);
  EXPECT_NO_THROW(dataset_conforms(ds, at));
  ds.samples[0].qualityCodes = {kQualityGood};
  EXPECT_IFL_ERROR(dataset_conforms(ds, at), ErrorCode::SchemaMismatch);
}

TEST(DatasetConforms, GeneratorOutputAlwaysConforms) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t d = 1 + seed % 4;
    ConditionProfile p{"p", std::vector<double>(d, 0.5), 0.1, 0.2, -2, 3, 0.1, 0.2};
    const auto ds = gen_asset_dataset(p, 50, seed);
    EXPECT_NO_THROW(dataset_conforms(ds, fx::aspect("readings", static_cast<int>(d), true)));
  }
}

TEST(Validate, RejectsNonFiniteParamsAndBadConfig) {
  ModelParams p{{1.0, std::numeric_limits<double>::quiet_NaN()}, 0.0, 0};
  EXPECT_IFL_ERROR(validate(p), ErrorCode::ValidationFailed);
  TaskConfig cfg;
  cfg.learningRate = 0;
  EXPECT_IFL_ERROR(validate(cfg), ErrorCode::ValidationFailed);
  Variable v{"x", "", DataType::Integer, 0.5, 1, false};
  EXPECT_IFL_ERROR(validate(v), ErrorCode::ValidationFailed);
}

TEST(DomainJson, RoundTrips) {
  FLTask t{"t1", "o1", "m", "a", TaskKind::Evaluation, {}};
  t.config.repeatEverySec = 60;
  t.config.mode = SyncMode::Async;
  EXPECT_EQ(json(t).get<FLTask>(), t);

  const auto at = fx::aspect("E", 2, true);
  EXPECT_EQ(json(at).get<AspectType>(), at);

  auto ds = fx::dataset({{1, 2}, {3, 4}}, {5, 6}, true, "E");
  EXPECT_EQ(json(ds).get<Dataset>(), ds);

  FLPlan plan{"p", {"t1"}, {ClientStep::Preprocess, ClientStep::Train}, ServerStep::AsyncMerge, {{"d", 3, 4}}};
  EXPECT_EQ(json(plan).get<FLPlan>(), plan);
  EXPECT_EQ(json(plan)["serverStep"], "AsyncMerge");
}

TEST(DomainJson, MissingSampleValueReadsAsNaN) {
  const auto s = json::parse(R"({"timestamp": 1, "values": [null, 2.0], "target": 1.0})").get<Sample>();
  EXPECT_TRUE(std::isnan(s.values[0]));
  EXPECT_EQ(s.values[1], 2.0);
}
