#pragma once

// FL Cohort Manager: initial placement of submitted tasks, model similarity on
// server-provided probe inputs, complete-linkage clustering and continuous
// split / merge / move updates.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ifl/domain.hpp"

namespace ifl {

struct CohortSearchCriteria;

struct ProbeSet {
  AspectTypeId aspectTypeId;
  std::vector<std::vector<double>> inputs;
};

inline constexpr std::size_t kDefaultProbeSize = 64;

// Seeded uniform inputs on [low, high]^dimension.
ProbeSet make_probe_set(const AspectType& at, std::size_t size, std::uint64_t seed, double low = -1.0, double high = 1.0);

// Whether an existing member task may share a cohort with the task being placed.
using MemberAccepts = std::function<bool(const TaskId& member)>;
// Symmetric pairwise predicate over tasks of one population.
using TaskCompat = std::function<bool(const TaskId&, const TaskId&)>;

struct CohortPlacement {
  enum class Kind { Existing, NewDefault, NewSingleton };
  Kind kind = Kind::NewSingleton;
  CohortId cohort;  // set when kind == Existing
};

// Without criteria the task goes to the default cohort (created if missing)
// provided its members accept it; otherwise the first cohort by id whose
// members all accept it; otherwise a new singleton cohort.
CohortPlacement initial_assign(const FLTask& task, const CohortSearchCriteria* criteria, std::span<const FLCohort> cohorts,
                               const MemberAccepts& accepts);

// Prediction RMSE over the probe inputs. Throws DimensionMismatch.
double pairwise_distance(const ModelParams& a, const ModelParams& b, const ProbeSet& probe);

// Row-major symmetric matrix with zero diagonal.
struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

using Partition = std::vector<std::vector<TaskId>>;

// Agglomerative complete-linkage clustering: merge the closest admissible pair
// (linkage <= tau, all cross pairs compatible) until none is left. Ties go to
// the pair with the smallest (min task id, min task id). `compatible` is
// row-major n x n. Clusters come back sorted internally and by first member.
Partition cluster(std::span<const TaskId> taskIds, const DistanceMatrix& distances, double tau,
                  std::span<const char> compatible);

struct CohortSplit {
  CohortId cohort;
  std::vector<FLCohort> into;
};

struct CohortMerge {
  std::vector<CohortId> cohorts;
  FLCohort into;
};

struct TaskMove {
  TaskId task;
  CohortId from;
  CohortId to;
};

using CohortChange = std::variant<CohortSplit, CohortMerge, TaskMove>;

// Ordered list of changes; replaying them in order with apply_changes yields
// the updated cohort set.
struct CohortChangeSet {
  std::vector<CohortChange> changes;

  bool empty() const { return changes.empty(); }
  std::size_t split_count() const;
  std::size_t merge_count() const;
  std::size_t move_count() const;
};

std::vector<FLCohort> apply_changes(std::vector<FLCohort> cohorts, const CohortChangeSet& changes);

struct CohortUpdateParams {
  double tauSplit = 0.5;
  double tauMerge = 0.25;
  int threads = 1;
};

// Produces fresh cohort ids for split and merge products.
using CohortIdAllocator = std::function<CohortId()>;

// Split cohorts whose diameter exceeds tauSplit (re-clustered at tauMerge),
// merge cohort pairs within tauMerge, and move tasks that sit closer (by mean
// distance, minus a (tauSplit - tauMerge)/2 margin) to another cohort. Repeats
// until nothing changes, so applying the result is a fixed point.
// Throws MissingParams(taskId), ValidationFailed if tauMerge >= tauSplit.
CohortChangeSet update_cohorts(std::span<const FLCohort> cohorts, const std::map<TaskId, ModelParams>& paramsByTask,
                               const ProbeSet& probe, const CohortUpdateParams& params, const TaskCompat& compat,
                               const CohortIdAllocator& nextId);

// Checks: cohorts pairwise disjoint, union equals `population`, members
// pairwise compatible. Returns a description of the first violation.
std::optional<std::string> check_partition(std::span<const FLCohort> cohorts, const std::set<TaskId>& population,
                                           const TaskCompat& compat);

nlohmann::json to_json(const CohortChange& change);

}  // namespace ifl
