#include <filesystem>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ifl/registry.hpp"

using namespace ifl;

namespace {

struct RegistryTest : ::testing::Test {
  AspectType readings = fx::aspect("readings", 2, true);
  AssetType machine = fx::asset_type("machine", {"readings"});
  Catalog catalog;

  ClientId add(const std::string& org, const std::string& industry = "manufacturing") {
    return catalog.register_client(fx::registration(org, machine, {readings}, industry));
  }
};

}  // namespace

TEST_F(RegistryTest, WriteThenRead) {
  const auto id = add("O1");
  EXPECT_EQ(id, "O1");
  const auto all = catalog.catalog_query();
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all[0].organization.id, "O1");
  ASSERT_EQ(all[0].devices.size(), 1u);
  ASSERT_EQ(all[0].assets.size(), 1u);
  EXPECT_EQ(all[0].assets[0].id, "asset-O1");
}

TEST_F(RegistryTest, RegistrationIsIdempotent) {
  const auto a = add("O1");
  const auto before = catalog.to_json();
  EXPECT_EQ(add("O1"), a);
  EXPECT_EQ(catalog.to_json(), before);
}

TEST_F(RegistryTest, ConflictingAspectTypeRejected) {
  add("O1");
  auto other = fx::aspect("readings", 3, true);
  EXPECT_IFL_ERROR(catalog.register_client(fx::registration("O2", machine, {other})), ErrorCode::ConflictingMetadata);
  EXPECT_FALSE(catalog.is_registered("O2"));
}

TEST_F(RegistryTest, DeviceOwnedByOtherOrgRejected) {
  add("O1");
  auto req = fx::registration("O2", machine, {readings});
  req.devices[0].id = "dev-O1";
  req.assets[0].edgeDeviceId = "dev-O1";
  EXPECT_IFL_ERROR(catalog.register_client(req), ErrorCode::ConflictingMetadata);
}

TEST_F(RegistryTest, UnknownReferencesRejected) {
  auto req = fx::registration("O1", machine, {readings});
  req.assets[0].assetTypeId = "nope";
  EXPECT_IFL_ERROR(catalog.register_client(req), ErrorCode::ValidationFailed);
}

TEST_F(RegistryTest, CriteriaPostingAndReplacement) {
  add("O1");
  add("O2");
  EXPECT_TRUE(catalog.compatible("O1", "O2"));
  CohortSearchCriteria c{"O1", std::nullopt, {"O2"}, std::nullopt, std::nullopt, std::nullopt};
  catalog.post_search_criteria(c);
  EXPECT_FALSE(catalog.compatible("O1", "O2"));
  EXPECT_FALSE(catalog.compatible("O2", "O1"));

  CohortSearchCriteria open{"O1", std::nullopt, {}, std::nullopt, std::nullopt, std::nullopt};
  catalog.post_search_criteria(open);
  EXPECT_EQ(catalog.criteria_of("O1"), open);
  EXPECT_TRUE(catalog.compatible("O1", "O2"));
}

TEST_F(RegistryTest, CriteriaForUnknownClient) {
  EXPECT_IFL_ERROR(catalog.post_search_criteria(CohortSearchCriteria{"ghost", {}, {}, {}, {}, {}}), ErrorCode::UnknownClient);
  add("O1");
  EXPECT_IFL_ERROR(catalog.compatible("O1", "ghost"), ErrorCode::UnknownClient);
}

TEST_F(RegistryTest, AllowListSemantics) {
  add("O1");
  add("O2");
  add("O3");
  catalog.post_search_criteria(CohortSearchCriteria{"O1", std::set<OrganizationId>{"O2"}, {}, {}, {}, {}});
  EXPECT_TRUE(catalog.compatible("O1", "O2"));
  EXPECT_FALSE(catalog.compatible("O1", "O3"));
}

TEST_F(RegistryTest, BlockWinsRegardlessOfOtherSide) {
  add("O1");
  add("O2");
  catalog.post_search_criteria(CohortSearchCriteria{"O2", std::set<OrganizationId>{"O1"}, {}, {}, {}, {}});
  catalog.post_search_criteria(CohortSearchCriteria{"O1", std::nullopt, {"O2"}, {}, {}, {}});
  EXPECT_FALSE(catalog.compatible("O1", "O2"));
}

TEST_F(RegistryTest, QueryFilters) {
  add("O1", "automotive");
  add("O2", "chemicals");
  EXPECT_EQ(catalog.catalog_query({}).size(), 2u);
  EXPECT_TRUE(catalog.catalog_query({std::string("nobody"), {}, {}}).empty());
  const auto automotive = catalog.catalog_query({{}, {}, std::string("automotive")});
  ASSERT_EQ(automotive.size(), 1u);
  EXPECT_EQ(automotive[0].organization.id, "O1");
  EXPECT_EQ(catalog.catalog_query({{}, std::string("machine"), {}}).size(), 2u);
}

TEST_F(RegistryTest, FiltersNeverGrowTheResult) {
  for (int i = 0; i < 6; ++i) add("O" + std::to_string(i), i % 2 ? "a" : "b");
  const auto all = catalog.catalog_query().size();
  for (const auto& org : {std::optional<std::string>{}, std::optional<std::string>{"O1"}, std::optional<std::string>{"O9"}})
    for (const auto& ind : {std::optional<std::string>{}, std::optional<std::string>{"a"}}) {
      const auto base = catalog.catalog_query({org, {}, {}}).size();
      const auto narrowed = catalog.catalog_query({org, {}, ind}).size();
      EXPECT_LE(base, all);
      EXPECT_LE(narrowed, base);
    }
}

TEST_F(RegistryTest, CompatibleIsSymmetricUnderRandomCriteria) {
  const int n = 6;
  for (int i = 0; i < n; ++i) add("O" + std::to_string(i), i % 3 ? "x" : "y");
  rng::Engine e(11);
  for (int trial = 0; trial < 200; ++trial) {
    for (int i = 0; i < n; ++i) {
      CohortSearchCriteria c;
      c.clientId = "O" + std::to_string(i);
      if (rng::uniform01(e) < 0.5) {
        std::set<OrganizationId> allow;
        for (int j = 0; j < n; ++j)
          if (rng::uniform01(e) < 0.6) allow.insert("O" + std::to_string(j));
        c.allowOrganizations = allow;
      }
      for (int j = 0; j < n; ++j)
        if (rng::uniform01(e) < 0.15) c.blockOrganizations.insert("O" + std::to_string(j));
      if (c.allowOrganizations)
        for (const auto& b : c.blockOrganizations) c.allowOrganizations->erase(b);
      if (rng::uniform01(e) < 0.3) c.industries = std::set<std::string>{"x"};
      catalog.post_search_criteria(c);
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const auto a = "O" + std::to_string(i), b = "O" + std::to_string(j);
        ASSERT_EQ(catalog.compatible(a, b), catalog.compatible(b, a));
      }
  }
}

TEST_F(RegistryTest, AllowBlockOverlapRejected) {
  add("O1");
  add("O2");
  EXPECT_IFL_ERROR(catalog.post_search_criteria(CohortSearchCriteria{"O1", std::set<OrganizationId>{"O2"}, {"O2"}, {}, {}, {}}),
                   ErrorCode::ValidationFailed);
}

TEST(RegistryPersistence, ReloadsFromDisk) {
  const auto dir = std::filesystem::temp_directory_path() / "ifl_registry_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto path = dir / "catalog.json";
  {
    Catalog c(path);
    c.register_client(fx::registration("O1", fx::asset_type("machine", {"readings"}), {fx::aspect()}));
    c.register_model_spec(MLModelSpec{"m", Algorithm::LinearRegressionGD, 1, "readings"});
  }
  Catalog reloaded(path);
  EXPECT_TRUE(reloaded.is_registered("O1"));
  EXPECT_TRUE(reloaded.find_model_spec("m").has_value());
  EXPECT_TRUE(reloaded.find_asset("asset-O1").has_value());
  std::filesystem::remove_all(dir);
}
