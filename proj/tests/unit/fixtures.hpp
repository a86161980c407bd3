#pragma once

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ifl/domain.hpp"
#include "ifl/error.hpp"
#include "ifl/qoi.hpp"
#include "ifl/registry.hpp"
#include "ifl/rng.hpp"

#define EXPECT_IFL_ERROR(stmt, errcode)                                         \
  do {                                                                          \
    try {                                                                       \
      stmt;                                                                     \
      ADD_FAILURE() << "expected " << ifl::to_string(errcode) << ", no throw"; \
    } catch (const ifl::Error& e) {                                             \
      EXPECT_EQ(e.code(), errcode) << e.what();                                 \
    }                                                                           \
  } while (0)

namespace fx {

inline ifl::AspectType aspect(const std::string& id = "readings", int length = 1, bool codes = true) {
  ifl::AspectType at;
  at.id = id;
  at.name = id;
  ifl::Variable v;
  v.name = "x";
  v.length = length;
  v.qualityCode = codes;
  at.variables.push_back(v);
  return at;
}

inline ifl::AssetType asset_type(const std::string& id, std::set<std::string> aspects) {
  ifl::AssetType t;
  t.id = id;
  t.name = id;
  t.aspectTypeIds = std::move(aspects);
  return t;
}

// One organization with one device and one asset of `type`.
inline ifl::RegistrationRequest registration(const std::string& org, const ifl::AssetType& type,
                                             const std::vector<ifl::AspectType>& aspects, const std::string& industry = "manufacturing") {
  ifl::RegistrationRequest r;
  r.organization = {org, "Org " + org, industry};
  ifl::EdgeDevice d;
  d.id = "dev-" + org;
  d.organizationId = org;
  r.devices.push_back(d);
  ifl::Asset a;
  a.id = "asset-" + org;
  a.assetTypeId = type.id;
  a.edgeDeviceId = d.id;
  r.assets.push_back(a);
  r.assetTypes.push_back(type);
  r.aspectTypes = aspects;
  return r;
}

inline ifl::Dataset dataset(const std::vector<std::vector<double>>& x, const std::vector<double>& y, bool codes = false,
                            const std::string& aspectId = "readings") {
  ifl::Dataset ds;
  ds.aspectTypeId = aspectId;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ifl::Sample s;
    s.timestamp = static_cast<std::int64_t>(i) * 1000;
    s.values = x[i];
    s.target = y[i];
    if (codes) s.qualityCodes.assign(x[i].size(), ifl::kQualityGood);
    ds.samples.push_back(s);
  }
  return ds;
}

struct Xy {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
};

inline Xy random_linear(std::uint64_t seed, std::size_t n, std::size_t d, double noise = 0.1) {
  ifl::rng::Engine e(seed);
  Xy out;
  std::vector<double> w(d);
  for (auto& v : w) v = ifl::rng::uniform(e, -2, 2);
  const double b = ifl::rng::uniform(e, -1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(d);
    double y = b;
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = ifl::rng::uniform(e, -1, 1);
      y += w[j] * x[j];
    }
    out.x.push_back(x);
    out.y.push_back(y + noise * ifl::rng::standard_normal(e));
  }
  return out;
}

inline std::vector<double> xs_of(const ifl::Dataset& ds, std::size_t j) {
  std::vector<double> out;
  for (const auto& s : ds.samples) out.push_back(s.values[j]);
  return out;
}

}  // namespace fx
