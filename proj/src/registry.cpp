#include "ifl/registry.hpp"

#include <fstream>
#include <mutex>

#include <fmt/format.h>

#include "ifl/domain_json.hpp"
#include "ifl/error.hpp"

namespace ifl {

namespace {

template <typename Map, typename Value>
void upsert_checked(Map& store, const Value& v, const char* what) {
  const auto [it, inserted] = store.emplace(v.id, v);
  if (!inserted && !(it->second == v))
    fail(ErrorCode::ConflictingMetadata, v.id, fmt::format("{} re-registered with different content", what));
}

template <typename Map>
std::optional<typename Map::mapped_type> lookup(const Map& m, const typename Map::key_type& k) {
  const auto it = m.find(k);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

void write_atomically(const std::filesystem::path& path, const nlohmann::json& doc) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) fail(ErrorCode::ValidationFailed, path.string(), "cannot write catalog");
    out << doc.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

Catalog::Catalog(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(*path_)) {
    std::ifstream in(*path_);
    stores_ = parse(nlohmann::json::parse(in));
  }
}

ClientId Catalog::register_client(const RegistrationRequest& req) {
  const auto& org = req.organization;
  if (org.id.empty()) fail(ErrorCode::ValidationFailed, "", "organization id empty");

  std::unique_lock lock(mu_);
  Stores next = stores_;

  if (const auto it = next.organizations.find(org.id); it != next.organizations.end()) it->second = org;
  else next.organizations.emplace(org.id, org);

  for (const auto& at : req.aspectTypes) {
    validate(at);
    upsert_checked(next.aspectTypes, at, "aspect type");
  }
  for (const auto& t : req.assetTypes) {
    validate(t);
    for (const auto& aspect : t.aspectTypeIds)
      if (!next.aspectTypes.contains(aspect))
        fail(ErrorCode::ValidationFailed, t.id, "unknown aspect type " + aspect);
    upsert_checked(next.assetTypes, t, "asset type");
  }
  for (const auto& t : req.assetTypes)
    if (t.parentTypeId && !next.assetTypes.contains(*t.parentTypeId))
      fail(ErrorCode::ValidationFailed, t.id, "unknown parent asset type " + *t.parentTypeId);

  for (const auto& d : req.devices) {
    validate(d);
    if (d.organizationId != org.id)
      fail(ErrorCode::ValidationFailed, d.id, "device belongs to organization " + d.organizationId);
    if (const auto it = next.devices.find(d.id); it != next.devices.end() && it->second.organizationId != org.id)
      fail(ErrorCode::ConflictingMetadata, d.id, "device owned by another organization");
    next.devices[d.id] = d;
  }
  for (const auto& a : req.assets) {
    if (a.id.empty()) fail(ErrorCode::ValidationFailed, "", "asset id empty");
    if (!next.assetTypes.contains(a.assetTypeId)) fail(ErrorCode::ValidationFailed, a.id, "unknown asset type " + a.assetTypeId);
    const auto dev = next.devices.find(a.edgeDeviceId);
    if (dev == next.devices.end() || dev->second.organizationId != org.id)
      fail(ErrorCode::ValidationFailed, a.id, "edge device " + a.edgeDeviceId + " not registered for this organization");
    if (const auto it = next.assets.find(a.id); it != next.assets.end()) {
      const auto owner = next.devices.find(it->second.edgeDeviceId);
      if (owner != next.devices.end() && owner->second.organizationId != org.id)
        fail(ErrorCode::ConflictingMetadata, a.id, "asset owned by another organization");
    }
    next.assets[a.id] = a;
  }
  for (const auto& a : req.assets)
    if (a.parentAssetId && !next.assets.contains(*a.parentAssetId))
      fail(ErrorCode::ValidationFailed, a.id, "unknown parent asset " + *a.parentAssetId);

  std::vector<Asset> allAssets;
  std::vector<AssetType> allTypes;
  for (const auto& [id, a] : next.assets) allAssets.push_back(a);
  for (const auto& [id, t] : next.assetTypes) allTypes.push_back(t);
  try {
    validate_hierarchy(allAssets, allTypes);
  } catch (const Error& e) {
    fail(ErrorCode::ValidationFailed, e.subject(), e.what());
  }

  commit(std::move(next));
  return org.id;
}

void Catalog::register_model_spec(const MLModelSpec& spec) {
  std::unique_lock lock(mu_);
  Stores next = stores_;
  const auto at = next.aspectTypes.find(spec.aspectTypeId);
  if (at == next.aspectTypes.end()) fail(ErrorCode::ValidationFailed, spec.id, "unknown aspect type " + spec.aspectTypeId);
  validate(spec, at->second);
  upsert_checked(next.modelSpecs, spec, "model spec");
  commit(std::move(next));
}

void Catalog::post_search_criteria(const CohortSearchCriteria& criteria) {
  std::unique_lock lock(mu_);
  if (!stores_.organizations.contains(criteria.clientId))
    fail(ErrorCode::UnknownClient, criteria.clientId, "criteria posted for unregistered client");
  if (criteria.allowOrganizations)
    for (const auto& o : *criteria.allowOrganizations)
      if (criteria.blockOrganizations.contains(o))
        fail(ErrorCode::ValidationFailed, criteria.clientId, "organization " + o + " both allowed and blocked");
  Stores next = stores_;
  next.criteria[criteria.clientId] = criteria;
  commit(std::move(next));
}

std::vector<CatalogEntry> Catalog::catalog_query(const CatalogFilter& filter) const {
  std::shared_lock lock(mu_);
  std::vector<CatalogEntry> out;
  for (const auto& [id, org] : stores_.organizations) {
    if (filter.organizationId && *filter.organizationId != id) continue;
    if (filter.industry && *filter.industry != org.industry) continue;
    CatalogEntry entry{org, {}, {}};
    std::set<DeviceId> usedDevices;
    for (const auto& [aid, asset] : stores_.assets) {
      const auto dev = stores_.devices.find(asset.edgeDeviceId);
      if (dev == stores_.devices.end() || dev->second.organizationId != id) continue;
      if (filter.assetTypeId && asset.assetTypeId != *filter.assetTypeId) continue;
      entry.assets.push_back(asset);
      usedDevices.insert(asset.edgeDeviceId);
    }
    if (filter.assetTypeId && entry.assets.empty()) continue;
    for (const auto& [did, dev] : stores_.devices) {
      if (dev.organizationId != id) continue;
      if (filter.assetTypeId && !usedDevices.contains(did)) continue;
      entry.devices.push_back(dev);
    }
    out.push_back(std::move(entry));
  }
  return out;
}

bool Catalog::accepts(const Stores& s, const ClientId& from, const ClientId& to) {
  const auto it = s.criteria.find(from);
  if (it == s.criteria.end()) return true;
  const auto& c = it->second;
  if (c.blockOrganizations.contains(to)) return false;
  if (c.allowOrganizations && !c.allowOrganizations->contains(to)) return false;
  const auto& org = s.organizations.at(to);
  if (c.industries && !c.industries->contains(org.industry)) return false;

  if (c.assetTypeIds || c.aspectTypeIds) {
    bool typeMatch = !c.assetTypeIds;
    bool aspectMatch = !c.aspectTypeIds;
    for (const auto& [aid, asset] : s.assets) {
      const auto dev = s.devices.find(asset.edgeDeviceId);
      if (dev == s.devices.end() || dev->second.organizationId != to) continue;
      if (c.assetTypeIds && c.assetTypeIds->contains(asset.assetTypeId)) typeMatch = true;
      if (c.aspectTypeIds) {
        const auto t = s.assetTypes.find(asset.assetTypeId);
        if (t != s.assetTypes.end())
          for (const auto& aspect : t->second.aspectTypeIds)
            if (c.aspectTypeIds->contains(aspect)) aspectMatch = true;
      }
    }
    if (!typeMatch || !aspectMatch) return false;
  }
  return true;
}

bool Catalog::compatible(const ClientId& a, const ClientId& b) const {
  std::shared_lock lock(mu_);
  if (!stores_.organizations.contains(a)) fail(ErrorCode::UnknownClient, a, "unregistered client");
  if (!stores_.organizations.contains(b)) fail(ErrorCode::UnknownClient, b, "unregistered client");
  if (a == b) return true;
  return accepts(stores_, a, b) && accepts(stores_, b, a);
}

bool Catalog::is_registered(const ClientId& id) const {
  std::shared_lock lock(mu_);
  return stores_.organizations.contains(id);
}

std::optional<CohortSearchCriteria> Catalog::criteria_of(const ClientId& id) const {
  std::shared_lock lock(mu_);
  return lookup(stores_.criteria, id);
}

std::optional<Organization> Catalog::find_organization(const OrganizationId& id) const {
  std::shared_lock lock(mu_);
  return lookup(stores_.organizations, id);
}

std::optional<EdgeDevice> Catalog::find_device(const DeviceId& id) const {
  std::shared_lock lock(mu_);
  return lookup(stores_.devices, id);
}

std::optional<AspectType> Catalog::find_aspect_type(const AspectTypeId& id) const {
  std::shared_lock lock(mu_);
  return lookup(stores_.aspectTypes, id);
}

std::optional<Asset> Catalog::find_asset(const AssetId& id) const {
  std::shared_lock lock(mu_);
  return lookup(stores_.assets, id);
}

std::optional<AssetType> Catalog::find_asset_type(const AssetTypeId& id) const {
  std::shared_lock lock(mu_);
  return lookup(stores_.assetTypes, id);
}

std::optional<MLModelSpec> Catalog::find_model_spec(const ModelSpecId& id) const {
  std::shared_lock lock(mu_);
  return lookup(stores_.modelSpecs, id);
}

nlohmann::json Catalog::to_json() const {
  std::shared_lock lock(mu_);
  return dump(stores_);
}

void Catalog::save(const std::filesystem::path& path) const { write_atomically(path, to_json()); }

// Caller holds the unique lock.
void Catalog::commit(Stores next) {
  if (path_) write_atomically(*path_, dump(next));
  stores_ = std::move(next);
}

namespace {

template <typename Map>
nlohmann::json values_of(const Map& m) {
  auto arr = nlohmann::json::array();
  for (const auto& [k, v] : m) arr.push_back(v);
  return arr;
}

template <typename Map>
void load_into(const nlohmann::json& j, const char* key, Map& m) {
  if (!j.contains(key)) return;
  for (const auto& item : j.at(key)) {
    auto v = item.get<typename Map::mapped_type>();
    m.emplace(v.id, v);
  }
}

}  // namespace

nlohmann::json Catalog::dump(const Stores& s) {
  nlohmann::json criteria = nlohmann::json::array();
  for (const auto& [k, c] : s.criteria) criteria.push_back(c);
  return {{"organizations", values_of(s.organizations)}, {"devices", values_of(s.devices)},
          {"assets", values_of(s.assets)},               {"assetTypes", values_of(s.assetTypes)},
          {"aspectTypes", values_of(s.aspectTypes)},     {"modelSpecs", values_of(s.modelSpecs)},
          {"criteria", criteria}};
}

Catalog::Stores Catalog::parse(const nlohmann::json& j) {
  Stores s;
  load_into(j, "organizations", s.organizations);
  load_into(j, "devices", s.devices);
  load_into(j, "assets", s.assets);
  load_into(j, "assetTypes", s.assetTypes);
  load_into(j, "aspectTypes", s.aspectTypes);
  load_into(j, "modelSpecs", s.modelSpecs);
  if (j.contains("criteria"))
    for (const auto& item : j.at("criteria")) {
      auto c = item.get<CohortSearchCriteria>();
      s.criteria.emplace(c.clientId, c);
    }
  return s;
}

void to_json(nlohmann::json& j, const Organization& v) {
  j = {{"id", v.id}, {"name", v.name}, {"industry", v.industry}};
}

void from_json(const nlohmann::json& j, Organization& v) {
  v.id = j.at("id").get<std::string>();
  v.name = value_or<std::string>(j, "name", v.id);
  v.industry = value_or<std::string>(j, "industry", "");
}

void to_json(nlohmann::json& j, const RegistrationRequest& v) {
  j = {{"organization", v.organization}, {"devices", v.devices},       {"assets", v.assets},
       {"assetTypes", v.assetTypes},     {"aspectTypes", v.aspectTypes}};
}

void from_json(const nlohmann::json& j, RegistrationRequest& v) {
  v.organization = j.at("organization").get<Organization>();
  v.devices = value_or(j, "devices", std::vector<EdgeDevice>{});
  v.assets = value_or(j, "assets", std::vector<Asset>{});
  v.assetTypes = value_or(j, "assetTypes", std::vector<AssetType>{});
  v.aspectTypes = value_or(j, "aspectTypes", std::vector<AspectType>{});
}

void to_json(nlohmann::json& j, const CohortSearchCriteria& v) {
  j = {{"clientId", v.clientId}, {"blockOrganizations", v.blockOrganizations}};
  put_optional(j, "allowOrganizations", v.allowOrganizations);
  put_optional(j, "industries", v.industries);
  put_optional(j, "assetTypeIds", v.assetTypeIds);
  put_optional(j, "aspectTypeIds", v.aspectTypeIds);
}

void from_json(const nlohmann::json& j, CohortSearchCriteria& v) {
  using Set = std::set<std::string>;
  v.clientId = j.at("clientId").get<std::string>();
  v.allowOrganizations = get_optional<Set>(j, "allowOrganizations");
  v.blockOrganizations = value_or(j, "blockOrganizations", Set{});
  v.industries = get_optional<Set>(j, "industries");
  v.assetTypeIds = get_optional<Set>(j, "assetTypeIds");
  v.aspectTypeIds = get_optional<Set>(j, "aspectTypeIds");
}

void to_json(nlohmann::json& j, const CatalogEntry& v) {
  j = {{"organization", v.organization}, {"devices", v.devices}, {"assets", v.assets}};
}

}  // namespace ifl
