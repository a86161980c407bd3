#pragma once

// Client Registry and Device & Asset Metadata Catalog.
//
// The catalog is the server's only view of participating organizations. It
// stores metadata (organizations, edge devices, assets, asset/aspect types,
// model specs) and the cohort search criteria each client posted. It never
// stores or hands out dataset samples.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ifl/domain.hpp"

namespace ifl {

struct Organization {
  OrganizationId id;
  std::string name;
  std::string industry;

  bool operator==(const Organization&) const = default;
};

struct RegistrationRequest {
  Organization organization;
  std::vector<EdgeDevice> devices;
  std::vector<Asset> assets;
  std::vector<AssetType> assetTypes;
  std::vector<AspectType> aspectTypes;
};

struct CohortSearchCriteria {
  ClientId clientId;
  std::optional<std::set<OrganizationId>> allowOrganizations;  // absent = allow all
  std::set<OrganizationId> blockOrganizations;
  std::optional<std::set<std::string>> industries;
  std::optional<std::set<AssetTypeId>> assetTypeIds;
  std::optional<std::set<AspectTypeId>> aspectTypeIds;

  bool operator==(const CohortSearchCriteria&) const = default;
};

struct CatalogFilter {
  std::optional<OrganizationId> organizationId;
  std::optional<AssetTypeId> assetTypeId;
  std::optional<std::string> industry;
};

// One organization with the devices and assets that survive the filter.
struct CatalogEntry {
  Organization organization;
  std::vector<EdgeDevice> devices;
  std::vector<Asset> assets;

  bool operator==(const CatalogEntry&) const = default;
};

class Catalog final : public MetadataResolver {
 public:
  Catalog() = default;
  // Loads the document at `path` if it exists; every later mutation rewrites
  // it atomically (temp file + rename).
  explicit Catalog(std::filesystem::path path);

  Catalog(const Catalog&) = delete;
  Catalog& operator=(const Catalog&) = delete;

  // Idempotent upsert keyed by organization id. Returns the client id.
  ClientId register_client(const RegistrationRequest& req);
  void register_model_spec(const MLModelSpec& spec);
  // Last write wins. Throws UnknownClient.
  void post_search_criteria(const CohortSearchCriteria& criteria);

  std::vector<CatalogEntry> catalog_query(const CatalogFilter& filter = {}) const;

  // Symmetric: both clients' criteria must accept the counterpart.
  bool compatible(const ClientId& a, const ClientId& b) const;

  bool is_registered(const ClientId& id) const;
  std::optional<CohortSearchCriteria> criteria_of(const ClientId& id) const;
  std::optional<Organization> find_organization(const OrganizationId& id) const;
  std::optional<EdgeDevice> find_device(const DeviceId& id) const;
  std::optional<AspectType> find_aspect_type(const AspectTypeId& id) const;
  std::optional<Asset> find_asset(const AssetId& id) const override;
  std::optional<AssetType> find_asset_type(const AssetTypeId& id) const override;
  std::optional<MLModelSpec> find_model_spec(const ModelSpecId& id) const override;

  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;

 private:
  struct Stores {
    std::map<OrganizationId, Organization> organizations;
    std::map<DeviceId, EdgeDevice> devices;
    std::map<AssetId, Asset> assets;
    std::map<AssetTypeId, AssetType> assetTypes;
    std::map<AspectTypeId, AspectType> aspectTypes;
    std::map<ModelSpecId, MLModelSpec> modelSpecs;
    std::map<ClientId, CohortSearchCriteria> criteria;
  };

  static nlohmann::json dump(const Stores& s);
  static Stores parse(const nlohmann::json& j);
  static bool accepts(const Stores& s, const ClientId& from, const ClientId& to);
  void commit(Stores next);

  mutable std::shared_mutex mu_;
  Stores stores_;
  std::optional<std::filesystem::path> path_;
};

void to_json(nlohmann::json& j, const Organization& v);
void from_json(const nlohmann::json& j, Organization& v);
void to_json(nlohmann::json& j, const RegistrationRequest& v);
void from_json(const nlohmann::json& j, RegistrationRequest& v);
void to_json(nlohmann::json& j, const CohortSearchCriteria& v);
void from_json(const nlohmann::json& j, CohortSearchCriteria& v);
void to_json(nlohmann::json& j, const CatalogEntry& v);

}  // namespace ifl
