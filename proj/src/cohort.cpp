#include "ifl/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "ifl/domain_json.hpp"
#include "ifl/error.hpp"
#include "ifl/kernels.hpp"
#include "ifl/registry.hpp"
#include "ifl/rng.hpp"

namespace ifl {

ProbeSet make_probe_set(const AspectType& at, std::size_t size, std::uint64_t seed, double low, double high) {
  if (!(low < high)) fail(ErrorCode::ValidationFailed, at.id, "probe range must satisfy low < high");
  if (size == 0) fail(ErrorCode::ValidationFailed, at.id, "probe set must be nonempty");
  rng::Engine engine(rng::derive_seed(seed, rng::hash(at.id), "probe"));
  ProbeSet probe{at.id, {}};
  probe.inputs.resize(size, std::vector<double>(at.dimension()));
  for (auto& x : probe.inputs)
    for (auto& v : x) v = rng::uniform(engine, low, high);
  return probe;
}

CohortPlacement initial_assign(const FLTask& task, const CohortSearchCriteria* criteria, std::span<const FLCohort> cohorts,
                               const MemberAccepts& accepts) {
  const auto acceptsAll = [&](const FLCohort& c) {
    return std::all_of(c.taskIds.begin(), c.taskIds.end(), [&](const TaskId& m) { return m == task.id || accepts(m); });
  };

  std::vector<const FLCohort*> ordered;
  for (const auto& c : cohorts) ordered.push_back(&c);
  std::sort(ordered.begin(), ordered.end(), [](const FLCohort* a, const FLCohort* b) { return a->id < b->id; });

  if (criteria == nullptr) {
    const auto def = std::find_if(ordered.begin(), ordered.end(), [](const FLCohort* c) { return c->isDefault; });
    if (def == ordered.end()) return {CohortPlacement::Kind::NewDefault, {}};
    if (acceptsAll(**def)) return {CohortPlacement::Kind::Existing, (*def)->id};
  }
  for (const auto* c : ordered)
    if (acceptsAll(*c)) return {CohortPlacement::Kind::Existing, c->id};
  return {CohortPlacement::Kind::NewSingleton, {}};
}

double pairwise_distance(const ModelParams& a, const ModelParams& b, const ProbeSet& probe) {
  if (a.dim() != b.dim()) fail(ErrorCode::DimensionMismatch, "", "models differ in dimension");
  if (probe.inputs.empty()) fail(ErrorCode::ValidationFailed, probe.aspectTypeId, "empty probe set");
  double acc = 0.0;
  for (const auto& x : probe.inputs) {
    if (x.size() != a.dim()) fail(ErrorCode::DimensionMismatch, "", "probe input does not match model dimension");
    const double diff = kernels::predict_unchecked(a.weights, a.bias, x) - kernels::predict_unchecked(b.weights, b.bias, x);
    acc += diff * diff;
  }
  return std::sqrt(acc / static_cast<double>(probe.inputs.size()));
}

Partition cluster(std::span<const TaskId> taskIds, const DistanceMatrix& distances, double tau,
                  std::span<const char> compatible) {
  const std::size_t n = taskIds.size();
  if (distances.n != n || compatible.size() != n * n)
    fail(ErrorCode::DimensionMismatch, "", "distance/compatibility matrices do not match task count");

  // Clusters of original indices, kept ordered by their smallest task id.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return taskIds[a] < taskIds[b]; });
  std::vector<std::vector<std::size_t>> clusters;
  for (const auto i : order) clusters.push_back({i});

  // Cluster-level complete linkage and joint compatibility, updated on merge.
  std::vector<std::vector<double>> link(n, std::vector<double>(n));
  std::vector<std::vector<char>> ok(n, std::vector<char>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      link[a][b] = distances(order[a], order[b]);
      ok[a][b] = compatible[order[a] * n + order[b]] && compatible[order[b] * n + order[a]];
    }

  while (clusters.size() > 1) {
    std::size_t bestA = 0, bestB = 0;
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    // Rows are in min-task-id order, so scanning (a, b) with a < b and keeping
    // only strict improvements implements the tie-break.
    for (std::size_t a = 0; a < clusters.size(); ++a)
      for (std::size_t b = a + 1; b < clusters.size(); ++b)
        if (ok[a][b] && link[a][b] <= tau && link[a][b] < best) {
          best = link[a][b];
          bestA = a;
          bestB = b;
          found = true;
        }
    if (!found) break;

    auto& keep = clusters[bestA];
    keep.insert(keep.end(), clusters[bestB].begin(), clusters[bestB].end());
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      link[bestA][c] = link[c][bestA] = std::max(link[bestA][c], link[bestB][c]);
      ok[bestA][c] = ok[c][bestA] = ok[bestA][c] && ok[bestB][c];
    }
    link[bestA][bestA] = 0.0;
    ok[bestA][bestA] = 1;
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bestB));
    link.erase(link.begin() + static_cast<std::ptrdiff_t>(bestB));
    ok.erase(ok.begin() + static_cast<std::ptrdiff_t>(bestB));
    for (auto& row : link) row.erase(row.begin() + static_cast<std::ptrdiff_t>(bestB));
    for (auto& row : ok) row.erase(row.begin() + static_cast<std::ptrdiff_t>(bestB));
  }

  Partition out;
  for (const auto& c : clusters) {
    std::vector<TaskId> ids;
    for (const auto i : c) ids.push_back(taskIds[i]);
    std::sort(ids.begin(), ids.end());
    out.push_back(std::move(ids));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t CohortChangeSet::split_count() const {
  return static_cast<std::size_t>(std::count_if(changes.begin(), changes.end(), [](const auto& c) { return std::holds_alternative<CohortSplit>(c); }));
}

std::size_t CohortChangeSet::merge_count() const {
  return static_cast<std::size_t>(std::count_if(changes.begin(), changes.end(), [](const auto& c) { return std::holds_alternative<CohortMerge>(c); }));
}

std::size_t CohortChangeSet::move_count() const {
  return static_cast<std::size_t>(std::count_if(changes.begin(), changes.end(), [](const auto& c) { return std::holds_alternative<TaskMove>(c); }));
}

namespace {

std::vector<FLCohort>::iterator find_cohort(std::vector<FLCohort>& cohorts, const CohortId& id) {
  const auto it = std::find_if(cohorts.begin(), cohorts.end(), [&](const FLCohort& c) { return c.id == id; });
  if (it == cohorts.end()) fail(ErrorCode::UnresolvedReference, id, "cohort not found");
  return it;
}

void sort_by_id(std::vector<FLCohort>& cohorts) {
  std::sort(cohorts.begin(), cohorts.end(), [](const FLCohort& a, const FLCohort& b) { return a.id < b.id; });
}

void apply_one(std::vector<FLCohort>& cohorts, const CohortChange& change) {
  if (const auto* s = std::get_if<CohortSplit>(&change)) {
    cohorts.erase(find_cohort(cohorts, s->cohort));
    cohorts.insert(cohorts.end(), s->into.begin(), s->into.end());
  } else if (const auto* m = std::get_if<CohortMerge>(&change)) {
    for (const auto& id : m->cohorts) cohorts.erase(find_cohort(cohorts, id));
    cohorts.push_back(m->into);
  } else {
    const auto& mv = std::get<TaskMove>(change);
    find_cohort(cohorts, mv.from)->taskIds.erase(mv.task);
    find_cohort(cohorts, mv.to)->taskIds.insert(mv.task);
  }
  sort_by_id(cohorts);
}

}  // namespace

std::vector<FLCohort> apply_changes(std::vector<FLCohort> cohorts, const CohortChangeSet& changes) {
  sort_by_id(cohorts);
  for (const auto& c : changes.changes) apply_one(cohorts, c);
  return cohorts;
}

CohortChangeSet update_cohorts(std::span<const FLCohort> cohorts, const std::map<TaskId, ModelParams>& paramsByTask,
                               const ProbeSet& probe, const CohortUpdateParams& params, const TaskCompat& compat,
                               const CohortIdAllocator& nextId) {
  if (!(params.tauMerge < params.tauSplit)) fail(ErrorCode::ValidationFailed, "", "tauMerge must be below tauSplit");

  std::vector<TaskId> tasks;
  for (const auto& c : cohorts)
    for (const auto& t : c.taskIds) tasks.push_back(t);
  std::sort(tasks.begin(), tasks.end());
  std::map<TaskId, std::size_t> index;
  std::vector<ModelParams> models;
  for (const auto& t : tasks) {
    const auto it = paramsByTask.find(t);
    if (it == paramsByTask.end()) fail(ErrorCode::MissingParams, t, "no model params for task");
    index[t] = models.size();
    models.push_back(it->second);
  }

  const auto probeMatrix = kernels::to_design_matrix(probe.inputs);
  const DistanceMatrix dist{models.size(), params.threads > 1
                                               ? kernels::parallel::distance_matrix(models, probeMatrix, params.threads)
                                               : kernels::serial::distance_matrix(models, probeMatrix)};
  const auto d = [&](const TaskId& a, const TaskId& b) { return dist(index.at(a), index.at(b)); };

  const auto diameter = [&](const FLCohort& c) {
    double m = 0.0;
    for (const auto& a : c.taskIds)
      for (const auto& b : c.taskIds) m = std::max(m, d(a, b));
    return m;
  };
  const auto linkage = [&](const FLCohort& x, const FLCohort& y) {
    double m = 0.0;
    for (const auto& a : x.taskIds)
      for (const auto& b : y.taskIds) m = std::max(m, d(a, b));
    return m;
  };
  const auto crossCompatible = [&](const std::set<TaskId>& x, const std::set<TaskId>& y) {
    for (const auto& a : x)
      for (const auto& b : y)
        if (!compat(a, b)) return false;
    return true;
  };
  const auto meanDistance = [&](const TaskId& t, const std::set<TaskId>& members) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& m : members)
      if (m != t) {
        sum += d(t, m);
        ++count;
      }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
  };

  const double margin = (params.tauSplit - params.tauMerge) / 2.0;
  std::vector<FLCohort> work(cohorts.begin(), cohorts.end());
  sort_by_id(work);
  CohortChangeSet out;
  const auto record = [&](CohortChange change) {
    apply_one(work, change);
    out.changes.push_back(std::move(change));
  };

  const std::size_t maxPasses = 4 * (tasks.size() + 1);
  for (std::size_t pass = 0; pass < maxPasses; ++pass) {
    bool changed = false;

    // Split.
    for (std::size_t i = 0; i < work.size(); ++i) {
      const FLCohort c = work[i];
      if (c.taskIds.size() < 2 || diameter(c) <= params.tauSplit) continue;
      std::vector<TaskId> members(c.taskIds.begin(), c.taskIds.end());
      DistanceMatrix sub{members.size(), std::vector<double>(members.size() * members.size())};
      std::vector<char> subCompat(members.size() * members.size());
      for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = 0; b < members.size(); ++b) {
          sub.values[a * members.size() + b] = d(members[a], members[b]);
          subCompat[a * members.size() + b] = a == b || compat(members[a], members[b]);
        }
      const auto parts = cluster(members, sub, params.tauMerge, subCompat);
      if (parts.size() < 2) continue;
      CohortSplit split{c.id, {}};
      for (const auto& p : parts)
        split.into.push_back(FLCohort{nextId(), c.populationKey, std::set<TaskId>(p.begin(), p.end()), false});
      record(std::move(split));
      changed = true;
      i = static_cast<std::size_t>(-1);  // rescan in id order
    }

    // Merge: smallest-id admissible pair first, repeated.
    for (bool merged = true; merged;) {
      merged = false;
      for (std::size_t a = 0; a < work.size() && !merged; ++a)
        for (std::size_t b = a + 1; b < work.size() && !merged; ++b) {
          if (linkage(work[a], work[b]) > params.tauMerge || !crossCompatible(work[a].taskIds, work[b].taskIds)) continue;
          FLCohort into{nextId(), work[a].populationKey, work[a].taskIds, work[a].isDefault || work[b].isDefault};
          into.taskIds.insert(work[b].taskIds.begin(), work[b].taskIds.end());
          record(CohortMerge{{work[a].id, work[b].id}, std::move(into)});
          merged = changed = true;
        }
    }

    // Move: one at a time, rescanning after each.
    for (bool moved = true; moved;) {
      moved = false;
      for (std::size_t a = 0; a < work.size() && !moved; ++a) {
        if (work[a].taskIds.size() < 2) continue;
        for (const auto& t : work[a].taskIds) {
          const double own = meanDistance(t, work[a].taskIds);
          for (std::size_t b = 0; b < work.size(); ++b) {
            if (b == a) continue;
            const auto& target = work[b].taskIds;
            if (meanDistance(t, target) >= own - margin) continue;
            if (!crossCompatible({t}, target)) continue;
            const bool fits = std::all_of(target.begin(), target.end(), [&](const TaskId& m) { return d(t, m) <= params.tauSplit; });
            if (!fits) continue;
            record(TaskMove{t, work[a].id, work[b].id});
            moved = changed = true;
            break;
          }
          if (moved) break;
        }
      }
    }

    if (!changed) break;
  }
  return out;
}

std::optional<std::string> check_partition(std::span<const FLCohort> cohorts, const std::set<TaskId>& population,
                                           const TaskCompat& compat) {
  std::set<TaskId> seen;
  for (const auto& c : cohorts) {
    if (c.taskIds.empty()) return fmt::format("cohort {} is empty", c.id);
    for (const auto& t : c.taskIds) {
      if (!seen.insert(t).second) return fmt::format("task {} appears in more than one cohort", t);
      if (!population.contains(t)) return fmt::format("task {} is not part of the population", t);
    }
    for (const auto& a : c.taskIds)
      for (const auto& b : c.taskIds)
        if (a < b && !compat(a, b)) return fmt::format("cohort {} groups incompatible tasks {} and {}", c.id, a, b);
  }
  if (seen != population) return std::string("cohorts do not cover the population");
  return std::nullopt;
}

nlohmann::json to_json(const CohortChange& change) {
  if (const auto* s = std::get_if<CohortSplit>(&change)) {
    auto into = nlohmann::json::array();
    for (const auto& c : s->into) into.push_back({{"id", c.id}, {"taskIds", c.taskIds}});
    return {{"kind", "split"}, {"cohort", s->cohort}, {"into", into}};
  }
  if (const auto* m = std::get_if<CohortMerge>(&change))
    return {{"kind", "merge"}, {"cohorts", m->cohorts}, {"into", {{"id", m->into.id}, {"taskIds", m->into.taskIds}}}};
  const auto& mv = std::get<TaskMove>(change);
  return {{"kind", "move"}, {"task", mv.task}, {"from", mv.from}, {"to", mv.to}};
}

}  // namespace ifl
