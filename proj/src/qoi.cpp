#include "ifl/qoi.hpp"

#include <algorithm>
#include <cmath>

#include "ifl/error.hpp"

namespace ifl {

QualityCategory code_category(std::uint8_t code) {
  switch (code >> 6) {
    case 0b11: return QualityCategory::Good;
    case 0b01: return QualityCategory::Uncertain;
    default: return QualityCategory::Bad;
  }
}

QoIReport qoi_score(const Dataset& ds, std::size_t dimension, int nRef, ClientId clientId, TaskId taskId) {
  if (nRef < 1) fail(ErrorCode::ValidationFailed, "", "nRef must be positive");
  QoIReport r;
  r.clientId = std::move(clientId);
  r.taskId = std::move(taskId);
  r.sampleCount = ds.size();

  std::uint64_t codes = 0;
  double credit = 0.0;
  std::uint64_t wellFormed = 0;
  for (const auto& s : ds.samples) {
    for (const auto c : s.qualityCodes) {
      ++codes;
      switch (code_category(c)) {
        case QualityCategory::Good: credit += 1.0; break;
        case QualityCategory::Uncertain: credit += 0.5; break;
        case QualityCategory::Bad: break;
      }
    }
    const bool finite = std::all_of(s.values.begin(), s.values.end(), [](double v) { return std::isfinite(v); });
    if (s.values.size() == dimension && finite && std::isfinite(s.target)) ++wellFormed;
  }

  r.freeOfError = codes == 0 ? 1.0 : credit / static_cast<double>(codes);
  r.appropriateAmount = std::min(1.0, static_cast<double>(r.sampleCount) / nRef);
  r.consistentRepresentation = ds.empty() ? 0.0 : static_cast<double>(wellFormed) / static_cast<double>(ds.size());
  r.score = std::cbrt(r.freeOfError * r.appropriateAmount * r.consistentRepresentation);
  return r;
}

std::vector<double> contribution_weights(std::span<const ContributionEntry> entries) {
  if (entries.empty()) fail(ErrorCode::ValidationFailed, "", "no contribution entries");
  std::vector<double> mass;
  mass.reserve(entries.size());
  double total = 0.0;
  for (const auto& e : entries) {
    if (!(e.qoiScore >= 0.0) || !std::isfinite(e.qoiScore)) fail(ErrorCode::ValidationFailed, "", "QoI score must be a nonnegative real");
    mass.push_back(static_cast<double>(e.sampleCount) * e.qoiScore);
    total += mass.back();
  }
  if (!(total > 0.0)) fail(ErrorCode::AllZeroMass, "", "every client has zero contribution mass");
  for (auto& m : mass) m /= total;
  return mass;
}

void to_json(nlohmann::json& j, const QoIReport& r) {
  j = {{"clientId", r.clientId},
       {"taskId", r.taskId},
       {"freeOfError", r.freeOfError},
       {"appropriateAmount", r.appropriateAmount},
       {"consistentRepresentation", r.consistentRepresentation},
       {"score", r.score},
       {"sampleCount", r.sampleCount}};
}

void from_json(const nlohmann::json& j, QoIReport& r) {
  r.clientId = j.at("clientId").get<std::string>();
  r.taskId = j.at("taskId").get<std::string>();
  r.freeOfError = j.at("freeOfError").get<double>();
  r.appropriateAmount = j.at("appropriateAmount").get<double>();
  r.consistentRepresentation = j.at("consistentRepresentation").get<double>();
  r.score = j.at("score").get<double>();
  r.sampleCount = j.at("sampleCount").get<std::uint64_t>();
}

}  // namespace ifl
