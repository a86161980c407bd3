#include "ifl/scheduling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "ifl/error.hpp"

namespace ifl {

bool DeviceSchedule::is_conflict_free() const {
  std::map<DeviceId, std::vector<std::pair<Tick, Tick>>> byDevice;
  for (const auto& e : entries) byDevice[e.deviceId].emplace_back(e.startTick, e.startTick + e.durationTicks);
  for (auto& [dev, intervals] : byDevice) {
    std::sort(intervals.begin(), intervals.end());
    for (std::size_t i = 1; i < intervals.size(); ++i)
      if (intervals[i].first < intervals[i - 1].second) return false;
  }
  return true;
}

std::optional<Tick> DeviceSchedule::start_of(const PlanId& plan) const {
  for (const auto& e : entries)
    if (e.planId == plan) return e.startTick;
  return std::nullopt;
}

DeviceSchedule build_schedule(std::span<const FLPlan> plans, const DeviceLoads& deviceLoads, const Freshness& freshness) {
  struct Pending {
    const FLPlan* plan;
    Tick fresh;
    std::map<DeviceId, Tick> demand;  // device -> total duration
  };
  std::vector<Pending> pending;
  for (const auto& p : plans) {
    Pending item{&p, std::numeric_limits<Tick>::min(), {}};
    for (const auto& t : p.taskIds)
      if (const auto it = freshness.find(t); it != freshness.end()) item.fresh = std::max(item.fresh, it->second);
    for (const auto& e : p.schedule) {
      if (!deviceLoads.contains(e.deviceId)) fail(ErrorCode::UnresolvedDevice, e.deviceId, "plan " + p.id + " names unknown device");
      if (e.durationTicks <= 0) fail(ErrorCode::ValidationFailed, p.id, "schedule durations must be positive");
      item.demand[e.deviceId] += e.durationTicks;
    }
    pending.push_back(std::move(item));
  }
  std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    if (a.fresh != b.fresh) return a.fresh > b.fresh;
    return a.plan->id < b.plan->id;
  });

  std::map<DeviceId, std::vector<std::pair<Tick, Tick>>> busy;  // [start, end)
  DeviceSchedule out;
  for (const auto& item : pending) {
    std::set<Tick> candidates{0};
    for (const auto& [dev, dur] : item.demand) {
      candidates.insert(deviceLoads.at(dev));
      for (const auto& iv : busy[dev]) candidates.insert(iv.second);
    }
    const auto fits = [&](Tick t) {
      for (const auto& [dev, dur] : item.demand) {
        if (t < deviceLoads.at(dev)) return false;
        for (const auto& iv : busy[dev])
          if (t < iv.second && iv.first < t + dur) return false;
      }
      return true;
    };
    Tick start = 0;
    for (const auto t : candidates)
      if (t >= 0 && fits(t)) {
        start = t;
        break;
      }
    for (const auto& [dev, dur] : item.demand) {
      busy[dev].emplace_back(start, start + dur);
      out.entries.push_back({item.plan->id, dev, start, dur});
    }
  }
  return out;
}

void validate(const CostWeights& w) {
  if (!(w.alpha >= 0 && w.beta >= 0 && w.gamma >= 0)) fail(ErrorCode::ValidationFailed, "", "cost weights must be nonnegative");
  if (w.alpha == 0 && w.beta == 0 && w.gamma == 0) fail(ErrorCode::ValidationFailed, "", "cost weights must not all be zero");
}

void LatencyTable::set(const ClientId& a, const ClientId& b, double ticks) {
  if (!(ticks >= 0.0)) fail(ErrorCode::ValidationFailed, a, "latency must be nonnegative");
  table_[std::minmax(a, b)] = ticks;
}

double LatencyTable::get(const ClientId& a, const ClientId& b) const {
  if (a == b) return 0.0;
  const auto it = table_.find(std::minmax(a, b));
  if (it == table_.end()) fail(ErrorCode::UnresolvedReference, a + "," + b, "no latency recorded for pair");
  return it->second;
}

ClientId cohort_coordinator(std::span<const ClientId> members, const LatencyTable& latency) {
  std::set<ClientId> unique(members.begin(), members.end());
  ClientId best;
  double bestWorst = std::numeric_limits<double>::infinity();
  for (const auto& c : unique) {  // ascending, strict improvement keeps the smallest id on ties
    double worst = 0.0;
    for (const auto& o : unique) worst = std::max(worst, latency.get(c, o));
    if (worst < bestWorst) {
      bestWorst = worst;
      best = c;
    }
  }
  return best;
}

double assignment_cost(const Assignment& assignment, const AssignmentStats& stats, const CostWeights& w,
                       const AssignmentCompat& compat) {
  double processing = 0.0;
  std::map<CohortId, std::vector<TaskId>> members;
  for (const auto& [task, cohort] : assignment) {
    const auto it = stats.processingCost.find(task);
    if (it == stats.processingCost.end()) fail(ErrorCode::ValidationFailed, task, "no processing cost for task");
    processing += it->second;
    members[cohort].push_back(task);
  }

  double latency = 0.0;
  for (const auto& [cohort, tasks] : members) {
    if (compat)
      for (std::size_t a = 0; a < tasks.size(); ++a)
        for (std::size_t b = a + 1; b < tasks.size(); ++b)
          if (!compat(tasks[a], tasks[b]))
            fail(ErrorCode::IncompatibleAssignment, cohort, fmt::format("tasks {} and {} may not share a cohort", tasks[a], tasks[b]));
    std::vector<ClientId> clients;
    for (const auto& t : tasks) clients.push_back(stats.taskClient.at(t));
    const auto coordinator = cohort_coordinator(clients, stats.latency);
    for (const auto& c : clients) latency += stats.latency.get(c, coordinator);
  }

  std::size_t changed = 0;
  for (const auto& [task, cohort] : assignment) {
    const auto it = stats.currentAssignment.find(task);
    if (it == stats.currentAssignment.end() || it->second != cohort) ++changed;
  }
  return w.alpha * processing + w.beta * latency + w.gamma * static_cast<double>(changed);
}

namespace {

bool strictly_less(double a, double b) { return a < b - 1e-12 * std::max(1.0, std::abs(b)); }

struct Problem {
  std::vector<TaskId> tasks;
  std::vector<std::vector<CohortId>> candidates;  // aligned with tasks
};

Problem normalize(const OptimizeRequest& request) {
  Problem p;
  p.tasks = request.tasks;
  std::sort(p.tasks.begin(), p.tasks.end());
  p.tasks.erase(std::unique(p.tasks.begin(), p.tasks.end()), p.tasks.end());
  for (const auto& t : p.tasks) {
    const auto it = request.cohortCandidates.find(t);
    if (it == request.cohortCandidates.end() || it->second.empty()) fail(ErrorCode::Infeasible, t, "task has no cohort candidates");
    auto c = it->second;
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    p.candidates.push_back(std::move(c));
  }
  return p;
}

bool fits(const Assignment& partial, const TaskId& task, const CohortId& cohort, const AssignmentCompat& compat) {
  for (const auto& [other, c] : partial)
    if (compat && c == cohort && other != task && !compat(task, other)) return false;
  return true;
}

}  // namespace

Assignment optimize_exhaustive(const OptimizeRequest& request, const AssignmentStats& stats, const CostWeights& w,
                               const AssignmentCompat& compat) {
  validate(w);
  const auto p = normalize(request);
  Assignment current;
  std::optional<Assignment> best;
  double bestCost = std::numeric_limits<double>::infinity();
  std::size_t deepest = 0;

  // Depth-first in (task id, cohort id) order: the first minimum found is the
  // lexicographically smallest.
  const std::function<void(std::size_t)> search = [&](std::size_t i) {
    deepest = std::max(deepest, i);
    if (i == p.tasks.size()) {
      const double cost = assignment_cost(current, stats, w);
      if (!best || strictly_less(cost, bestCost)) {
        best = current;
        bestCost = cost;
      }
      return;
    }
    for (const auto& c : p.candidates[i]) {
      if (!fits(current, p.tasks[i], c, compat)) continue;
      current[p.tasks[i]] = c;
      search(i + 1);
      current.erase(p.tasks[i]);
    }
  };
  search(0);
  if (!best) fail(ErrorCode::Infeasible, p.tasks[std::min(deepest, p.tasks.size() - 1)], "no compatible assignment exists");
  return *best;
}

Assignment optimize_greedy(const OptimizeRequest& request, const AssignmentStats& stats, const CostWeights& w,
                           const AssignmentCompat& compat) {
  validate(w);
  const auto p = normalize(request);
  Assignment a;

  // Keep every task whose current cohort is still a feasible candidate.
  for (std::size_t i = 0; i < p.tasks.size(); ++i) {
    const auto it = stats.currentAssignment.find(p.tasks[i]);
    if (it == stats.currentAssignment.end()) continue;
    const auto& cands = p.candidates[i];
    if (std::find(cands.begin(), cands.end(), it->second) == cands.end()) continue;
    if (fits(a, p.tasks[i], it->second, compat)) a[p.tasks[i]] = it->second;
  }
  // Place the rest at their cheapest feasible candidate.
  for (std::size_t i = 0; i < p.tasks.size(); ++i) {
    if (a.contains(p.tasks[i])) continue;
    std::optional<CohortId> pick;
    double pickCost = std::numeric_limits<double>::infinity();
    for (const auto& c : p.candidates[i]) {
      if (!fits(a, p.tasks[i], c, compat)) continue;
      auto trial = a;
      trial[p.tasks[i]] = c;
      const double cost = assignment_cost(trial, stats, w);
      if (!pick || strictly_less(cost, pickCost)) {
        pick = c;
        pickCost = cost;
      }
    }
    if (!pick) fail(ErrorCode::Infeasible, p.tasks[i], "no compatible cohort candidate");
    a[p.tasks[i]] = *pick;
  }

  // Best single-task move until no move improves.
  double cost = assignment_cost(a, stats, w);
  while (true) {
    std::optional<std::pair<TaskId, CohortId>> move;
    double moveCost = cost;
    for (std::size_t i = 0; i < p.tasks.size(); ++i)
      for (const auto& c : p.candidates[i]) {
        if (c == a[p.tasks[i]] || !fits(a, p.tasks[i], c, compat)) continue;
        auto trial = a;
        trial[p.tasks[i]] = c;
        const double trialCost = assignment_cost(trial, stats, w);
        if (strictly_less(trialCost, moveCost)) {
          moveCost = trialCost;
          move.emplace(p.tasks[i], c);
        }
      }
    if (!move) break;
    a[move->first] = move->second;
    cost = moveCost;
  }
  return a;
}

Assignment optimize_assignment(const OptimizeRequest& request, const AssignmentStats& stats, const CostWeights& w,
                               const AssignmentCompat& compat) {
  if (static_cast<int>(request.tasks.size()) <= request.maxExhaustive) return optimize_exhaustive(request, stats, w, compat);
  return optimize_greedy(request, stats, w, compat);
}

void to_json(nlohmann::json& j, const CostWeights& w) { j = {{"alpha", w.alpha}, {"beta", w.beta}, {"gamma", w.gamma}}; }

void from_json(const nlohmann::json& j, CostWeights& w) {
  const CostWeights d;
  w.alpha = j.value("alpha", d.alpha);
  w.beta = j.value("beta", d.beta);
  w.gamma = j.value("gamma", d.gamma);
  validate(w);
}

void to_json(nlohmann::json& j, const DeviceScheduleEntry& e) {
  j = {{"planId", e.planId}, {"deviceId", e.deviceId}, {"startTick", e.startTick}, {"durationTicks", e.durationTicks}};
}

}  // namespace ifl
