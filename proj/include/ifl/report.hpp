#pragma once

// Run report outputs: flat per-round CSV, partition agreement and the
// human/machine-readable summaries printed by `iflsim report`.

#include <map>
#include <ostream>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "ifl/orchestrator.hpp"

namespace ifl {

// Adjusted Rand Index of two labelings of the same items. 1.0 when the
// expected and maximum index coincide (e.g. both labelings trivial).
double adjusted_rand_index(std::span<const std::string> a, std::span<const std::string> b);
// Over the tasks present in both maps.
double adjusted_rand_index(const std::map<TaskId, std::string>& truth, const Assignment& assignment);

inline constexpr const char* kMetricsCsvHeader = "round,cohortId,taskId,mse,trainLoss,qoiScore,uplinkTicks,downlinkTicks,convergenceDelta";

void write_metrics_csv(std::ostream& out, const RunReport& report);

// Summaries of a report JSON document.
std::string summarize_text(const nlohmann::json& report);
std::string summarize_csv(const nlohmann::json& report);

}  // namespace ifl
