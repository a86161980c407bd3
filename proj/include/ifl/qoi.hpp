#pragma once

// Quality of Information evaluated on the client and turned into aggregation
// contribution weights on the server.

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ifl/domain.hpp"

namespace ifl {

enum class QualityCategory { Good, Uncertain, Bad };

// OPC quality: the two most significant bits. 0b11 Good, 0b01 Uncertain,
// 0b00 Bad, 0b10 (reserved) Bad.
QualityCategory code_category(std::uint8_t code);

inline constexpr std::uint8_t kQualityGood = 0xC0;
inline constexpr std::uint8_t kQualityUncertain = 0x40;
inline constexpr std::uint8_t kQualityBad = 0x00;

struct QoIReport {
  ClientId clientId;
  TaskId taskId;
  double freeOfError = 1.0;
  double appropriateAmount = 0.0;
  double consistentRepresentation = 0.0;
  double score = 0.0;  // geometric mean of the three dimensions
  std::uint64_t sampleCount = 0;

  bool operator==(const QoIReport&) const = default;
};

inline constexpr int kDefaultReferenceSamples = 100;

// freeOfError = (#Good + 0.5 #Uncertain) / #codes (1 when uncoded),
// appropriateAmount = min(1, n / nRef),
// consistentRepresentation = share of samples with `dimension` finite values.
QoIReport qoi_score(const Dataset& ds, std::size_t dimension, int nRef, ClientId clientId = {}, TaskId taskId = {});

struct ContributionEntry {
  std::uint64_t sampleCount = 0;
  double qoiScore = 0.0;
};

// weight_k = n_k q_k / sum_j n_j q_j. Throws AllZeroMass.
std::vector<double> contribution_weights(std::span<const ContributionEntry> entries);

void to_json(nlohmann::json& j, const QoIReport& r);
void from_json(const nlohmann::json& j, QoIReport& r);

}  // namespace ifl
