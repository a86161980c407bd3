#pragma once

// FL Scheduler and FL Resource Optimizer.
//
// build_schedule places plans on edge devices without overlap, freshest data
// first. assignment_cost / optimize_assignment trade processing cost and
// latency to the cohort coordinator against the cost of reconfiguring cohorts.

#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ifl/domain.hpp"

namespace ifl {

struct DeviceScheduleEntry {
  PlanId planId;
  DeviceId deviceId;
  Tick startTick = 0;
  Tick durationTicks = 1;

  bool operator==(const DeviceScheduleEntry&) const = default;
};

struct DeviceSchedule {
  std::vector<DeviceScheduleEntry> entries;

  // Per device, [start, start + duration) pairwise disjoint.
  bool is_conflict_free() const;
  std::optional<Tick> start_of(const PlanId& plan) const;
};

// Device id -> first tick at which the device is free.
using DeviceLoads = std::map<DeviceId, Tick>;
// Task id -> tick of the latest data update.
using Freshness = std::map<TaskId, Tick>;

// Plans sorted by freshness (newest data first, then plan id); all device
// entries of a plan start together at the earliest tick free on every one of
// its devices. Entry startTick values in the input plans are ignored.
// Throws UnresolvedDevice.
DeviceSchedule build_schedule(std::span<const FLPlan> plans, const DeviceLoads& deviceLoads, const Freshness& freshness);

struct CostWeights {
  double alpha = 1.0;  // processing
  double beta = 1.0;   // latency
  double gamma = 1.0;  // reconfiguration

  bool operator==(const CostWeights&) const = default;
};

void validate(const CostWeights& w);

using Assignment = std::map<TaskId, CohortId>;

class LatencyTable {
 public:
  void set(const ClientId& a, const ClientId& b, double ticks);
  // Zero for a == b; throws UnresolvedReference for unknown pairs.
  double get(const ClientId& a, const ClientId& b) const;

 private:
  std::map<std::pair<ClientId, ClientId>, double> table_;
};

struct AssignmentStats {
  std::map<TaskId, double> processingCost;
  std::map<TaskId, ClientId> taskClient;
  LatencyTable latency;
  Assignment currentAssignment;
};

using AssignmentCompat = std::function<bool(const TaskId&, const TaskId&)>;

// Client of the cohort that minimizes its max latency to the other members
// (ties: smallest client id).
ClientId cohort_coordinator(std::span<const ClientId> members, const LatencyTable& latency);

// J = alpha * sum processingCost + beta * sum latency(task client, cohort
// coordinator) + gamma * #tasks whose cohort differs from the current one.
// Throws IncompatibleAssignment when `compat` is given and violated.
double assignment_cost(const Assignment& assignment, const AssignmentStats& stats, const CostWeights& w,
                       const AssignmentCompat& compat = {});

inline constexpr int kDefaultMaxExhaustive = 10;

struct OptimizeRequest {
  std::vector<TaskId> tasks;
  std::map<TaskId, std::vector<CohortId>> cohortCandidates;
  int maxExhaustive = kDefaultMaxExhaustive;
};

// Exact minimizer (lexicographically smallest on ties) for up to
// maxExhaustive tasks, greedy best-single-move local search from the current
// assignment above that. Never violates `compat`. Throws Infeasible(taskId).
Assignment optimize_assignment(const OptimizeRequest& request, const AssignmentStats& stats, const CostWeights& w,
                               const AssignmentCompat& compat);

// The two strategies, exposed for comparison.
Assignment optimize_exhaustive(const OptimizeRequest& request, const AssignmentStats& stats, const CostWeights& w,
                               const AssignmentCompat& compat);
Assignment optimize_greedy(const OptimizeRequest& request, const AssignmentStats& stats, const CostWeights& w,
                           const AssignmentCompat& compat);

void to_json(nlohmann::json& j, const CostWeights& w);
void from_json(const nlohmann::json& j, CostWeights& w);
void to_json(nlohmann::json& j, const DeviceScheduleEntry& e);

}  // namespace ifl
