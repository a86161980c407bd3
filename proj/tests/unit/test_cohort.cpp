#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "../oracles/oracles.hpp"
#include "fixtures.hpp"
#include "ifl/cohort.hpp"
#include "ifl/registry.hpp"

using namespace ifl;

namespace {

FLTask task(const std::string& id, const std::string& client) { return FLTask{id, client, "m", "a", TaskKind::Training, {}}; }

FLCohort cohort(const std::string& id, std::set<TaskId> tasks, bool isDefault = false) {
  return FLCohort{id, PopulationKey{"machine", {"readings"}}, std::move(tasks), isDefault};
}

ProbeSet probe1d(std::vector<double> xs) {
  ProbeSet p{"readings", {}};
  for (double x : xs) p.inputs.push_back({x});
  return p;
}

ModelParams w1(double w, double b = 0.0) { return ModelParams{{w}, b, 0}; }

DistanceMatrix matrix(const std::vector<std::vector<double>>& d) {
  DistanceMatrix m;
  m.n = d.size();
  for (const auto& row : d) m.values.insert(m.values.end(), row.begin(), row.end());
  return m;
}

std::vector<char> all_compatible(std::size_t n) { return std::vector<char>(n * n, 1); }

struct Counter {
  int next = 100;
  CohortIdAllocator alloc() {
    return [this] { return "c" + std::to_string(next++); };
  }
};

const TaskCompat kAll = [](const TaskId&, const TaskId&) { return true; };

}  // namespace

TEST(InitialAssign, NoCriteriaGoesToDefault) {
  std::vector<FLCohort> none;
  auto p = initial_assign(task("t1", "O1"), nullptr, none, [](const TaskId&) { return true; });
  EXPECT_EQ(p.kind, CohortPlacement::Kind::NewDefault);

  std::vector<FLCohort> existing{cohort("c0001", {"t0"}, true)};
  p = initial_assign(task("t1", "O1"), nullptr, existing, [](const TaskId&) { return true; });
  EXPECT_EQ(p.kind, CohortPlacement::Kind::Existing);
  EXPECT_EQ(p.cohort, "c0001");
}

TEST(InitialAssign, NoCompatibleCohortGivesSingleton) {
  CohortSearchCriteria c{"O1", std::set<OrganizationId>{"O2"}, {}, {}, {}, {}};
  std::vector<FLCohort> existing{cohort("c0001", {"tO3"}, true)};
  const auto p = initial_assign(task("t1", "O1"), &c, existing, [](const TaskId& m) { return m != "tO3"; });
  EXPECT_EQ(p.kind, CohortPlacement::Kind::NewSingleton);
}

TEST(InitialAssign, LowestIdWins) {
  CohortSearchCriteria c{"O1", std::nullopt, {}, {}, {}, {}};
  std::vector<FLCohort> existing{cohort("c0002", {"tb"}), cohort("c0001", {"ta"})};
  const auto p = initial_assign(task("t1", "O1"), &c, existing, [](const TaskId&) { return true; });
  EXPECT_EQ(p.kind, CohortPlacement::Kind::Existing);
  EXPECT_EQ(p.cohort, "c0001");
}

TEST(PairwiseDistance, Examples) {
  const auto probe = probe1d({-1, 0, 1});
  EXPECT_EQ(pairwise_distance(w1(0.3, 1), w1(0.3, 1), probe), 0.0);
  EXPECT_NEAR(pairwise_distance(w1(1), w1(0), probe), std::sqrt(2.0 / 3.0), 1e-12);
  EXPECT_IFL_ERROR(pairwise_distance(w1(1), ModelParams{{1, 2}, 0, 0}, probe), ErrorCode::DimensionMismatch);
}

TEST(PairwiseDistance, MatchesOracleOnRandomPairs) {
  rng::Engine e(3);
  AspectType at = fx::aspect("readings", 3, false);
  const auto probe = make_probe_set(at, 64, 99);
  ASSERT_EQ(probe.inputs.size(), 64u);
  for (int i = 0; i < 50; ++i) {
    ModelParams a{{rng::uniform(e, -2, 2), rng::uniform(e, -2, 2), rng::uniform(e, -2, 2)}, rng::uniform(e, -1, 1), 0};
    ModelParams b{{rng::uniform(e, -2, 2), rng::uniform(e, -2, 2), rng::uniform(e, -2, 2)}, rng::uniform(e, -1, 1), 0};
    EXPECT_NEAR(pairwise_distance(a, b, probe), oracle::prediction_rmse(a.weights, a.bias, b.weights, b.bias, probe.inputs), 1e-12);
  }
}

TEST(ProbeSet, DeterministicAndInRange) {
  const auto at = fx::aspect("readings", 2, false);
  const auto a = make_probe_set(at, 16, 5, -2, 3);
  EXPECT_EQ(a.inputs, make_probe_set(at, 16, 5, -2, 3).inputs);
  for (const auto& x : a.inputs)
    for (double v : x) {
      EXPECT_GE(v, -2);
      EXPECT_LE(v, 3);
    }
}

TEST(Cluster, Examples) {
  std::vector<TaskId> two{"a", "b"};
  EXPECT_EQ(cluster(two, matrix({{0, 0}, {0, 0}}), 1.0, all_compatible(2)), (Partition{{"a", "b"}}));

  std::vector<TaskId> three{"t1", "t2", "t3"};
  const auto d = matrix({{0, 0.1, 5}, {0.1, 0, 5}, {5, 5, 0}});
  EXPECT_EQ(cluster(three, d, 1.0, all_compatible(3)), (Partition{{"t1", "t2"}, {"t3"}}));

  std::vector<char> compat = all_compatible(3);
  compat[0 * 3 + 1] = compat[1 * 3 + 0] = 0;
  EXPECT_EQ(cluster(three, d, 10.0, compat), (Partition{{"t1", "t3"}, {"t2"}}));
}

TEST(Cluster, PlantedPartitionMatchesBruteForce) {
  rng::Engine e(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 8;
    std::vector<int> block(n);
    for (auto& b : block) b = static_cast<int>(rng::uniform_int(e, 1));
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        d[i][j] = d[j][i] = block[i] == block[j] ? rng::uniform(e, 0.0, 0.3) : rng::uniform(e, 2.0, 3.0);
    std::vector<TaskId> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("t" + std::to_string(i));
    const auto got = cluster(ids, matrix(d), 1.0, all_compatible(n));

    oracle::Partition mapped;
    for (const auto& c : got) {
      std::vector<std::size_t> idx;
      for (const auto& t : c) idx.push_back(std::stoul(t.substr(1)));
      mapped.push_back(idx);
    }
    const std::vector<std::vector<bool>> compat(n, std::vector<bool>(n, true));
    EXPECT_EQ(oracle::canonical(mapped), oracle::best_partition(n, d, compat, 1.0)) << trial;
  }
}

TEST(Cluster, NeverGroupsIncompatibleTasks) {
  rng::Engine e(23);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng::uniform_int(e, 6);
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0));
    std::vector<char> compat(n * n, 1);
    std::vector<std::vector<bool>> compatB(n, std::vector<bool>(n, true));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        d[i][j] = d[j][i] = rng::uniform(e, 0, 1);
        if (rng::uniform01(e) < 0.3) {
          compat[i * n + j] = compat[j * n + i] = 0;
          compatB[i][j] = compatB[j][i] = false;
        }
      }
    std::vector<TaskId> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("t" + std::to_string(i));
    const double tau = rng::uniform(e, 0.1, 1.0);
    const auto got = cluster(ids, matrix(d), tau, compat);
    oracle::Partition mapped;
    for (const auto& c : got) {
      std::vector<std::size_t> idx;
      for (const auto& t : c) idx.push_back(std::stoul(t.substr(1)));
      mapped.push_back(idx);
    }
    EXPECT_TRUE(oracle::admissible(mapped, d, compatB, tau));
    EXPECT_TRUE(oracle::maximal(mapped, d, compatB, tau));
  }
}

TEST(UpdateCohorts, FixedPointIsEmpty) {
  std::vector<FLCohort> cs{cohort("c1", {"a", "b", "c"}, true)};
  std::map<TaskId, ModelParams> params{{"a", w1(1)}, {"b", w1(1)}, {"c", w1(1)}};
  Counter ids;
  EXPECT_TRUE(update_cohorts(cs, params, probe1d({-1, 0, 1}), {}, kAll, ids.alloc()).empty());
}

TEST(UpdateCohorts, SplitsDistantPair) {
  const auto probe = probe1d({-1, 0, 1});
  const double unit = std::sqrt(2.0 / 3.0);
  std::vector<FLCohort> cs{cohort("c1", {"A", "B"}, true)};
  // d(A, B) = 2 * tauSplit with tauSplit = 0.5.
  std::map<TaskId, ModelParams> params{{"A", w1(0)}, {"B", w1(1.0 / unit)}};
  Counter ids;
  const auto changes = update_cohorts(cs, params, probe, {0.5, 0.25, 1}, kAll, ids.alloc());
  EXPECT_EQ(changes.split_count(), 1u);
  EXPECT_EQ(changes.merge_count(), 0u);
  const auto after = apply_changes(cs, changes);
  ASSERT_EQ(after.size(), 2u);
  EXPECT_EQ(after[0].taskIds.size(), 1u);
  EXPECT_EQ(after[1].taskIds.size(), 1u);
}

TEST(UpdateCohorts, MergesCloseSingletons) {
  const auto probe = probe1d({-1, 0, 1});
  const double unit = std::sqrt(2.0 / 3.0);
  std::vector<FLCohort> cs{cohort("c1", {"A"}), cohort("c2", {"B"})};
  std::map<TaskId, ModelParams> params{{"A", w1(0)}, {"B", w1(0.125 / unit)}};
  Counter ids;
  const auto changes = update_cohorts(cs, params, probe, {0.5, 0.25, 1}, kAll, ids.alloc());
  EXPECT_EQ(changes.merge_count(), 1u);
  const auto after = apply_changes(cs, changes);
  ASSERT_EQ(after.size(), 1u);
  EXPECT_EQ(after[0].taskIds, (std::set<TaskId>{"A", "B"}));
}

TEST(UpdateCohorts, IncompatibleSingletonsStayApart) {
  const auto probe = probe1d({-1, 0, 1});
  std::vector<FLCohort> cs{cohort("c1", {"A"}), cohort("c2", {"B"})};
  std::map<TaskId, ModelParams> params{{"A", w1(0)}, {"B", w1(0)}};
  Counter ids;
  const TaskCompat never = [](const TaskId& a, const TaskId& b) { return a == b; };
  EXPECT_TRUE(update_cohorts(cs, params, probe, {0.5, 0.25, 1}, never, ids.alloc()).empty());
}

TEST(UpdateCohorts, Errors) {
  std::vector<FLCohort> cs{cohort("c1", {"A", "B"})};
  std::map<TaskId, ModelParams> params{{"A", w1(0)}};
  Counter ids;
  EXPECT_IFL_ERROR(update_cohorts(cs, params, probe1d({0}), {}, kAll, ids.alloc()), ErrorCode::MissingParams);
  params["B"] = w1(0);
  EXPECT_IFL_ERROR(update_cohorts(cs, params, probe1d({0}), {0.3, 0.3, 1}, kAll, ids.alloc()), ErrorCode::ValidationFailed);
}

TEST(UpdateCohorts, RandomInvariantsAndIdempotence) {
  rng::Engine e(41);
  const auto probe = probe1d({-1, -0.5, 0, 0.5, 1});
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng::uniform_int(e, 9);
    std::vector<TaskId> tasks;
    std::map<TaskId, ModelParams> params;
    for (std::size_t i = 0; i < n; ++i) {
      tasks.push_back("t" + std::to_string(i));
      params[tasks.back()] = w1(rng::uniform(e, -1.5, 1.5), rng::uniform(e, -0.5, 0.5));
    }
    std::set<std::pair<TaskId, TaskId>> blocked;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (rng::uniform01(e) < 0.15) {
          blocked.insert({tasks[i], tasks[j]});
          blocked.insert({tasks[j], tasks[i]});
        }
    const TaskCompat compat = [&](const TaskId& a, const TaskId& b) { return !blocked.contains({a, b}); };

    // Random initial partition that respects compat: greedy first fit.
    std::vector<FLCohort> cs;
    for (const auto& t : tasks) {
      bool placed = false;
      const std::size_t start = rng::uniform_int(e, cs.size());
      for (std::size_t k = 0; k < cs.size() && !placed; ++k) {
        auto& c = cs[(start + k) % cs.size()];
        if (std::all_of(c.taskIds.begin(), c.taskIds.end(), [&](const TaskId& m) { return compat(m, t); })) {
          c.taskIds.insert(t);
          placed = true;
        }
      }
      if (!placed) cs.push_back(cohort("c" + std::to_string(cs.size() + 1), {t}));
    }
    const std::set<TaskId> population(tasks.begin(), tasks.end());
    const CohortUpdateParams up{rng::uniform(e, 0.3, 1.0), 0.0, 1};
    CohortUpdateParams p = up;
    p.tauMerge = up.tauSplit * rng::uniform(e, 0.2, 0.8);

    Counter ids;
    const auto changes = update_cohorts(cs, params, probe, p, compat, ids.alloc());
    const auto after = apply_changes(cs, changes);
    ASSERT_FALSE(check_partition(after, population, compat).has_value()) << *check_partition(after, population, compat);
    EXPECT_TRUE(update_cohorts(after, params, probe, p, compat, ids.alloc()).empty()) << trial;
  }
}

TEST(CheckPartition, DetectsViolations) {
  const std::set<TaskId> pop{"a", "b", "c"};
  std::vector<FLCohort> ok{cohort("c1", {"a", "b"}), cohort("c2", {"c"})};
  EXPECT_FALSE(check_partition(ok, pop, kAll).has_value());
  std::vector<FLCohort> overlap{cohort("c1", {"a", "b"}), cohort("c2", {"b", "c"})};
  EXPECT_TRUE(check_partition(overlap, pop, kAll).has_value());
  std::vector<FLCohort> missing{cohort("c1", {"a"})};
  EXPECT_TRUE(check_partition(missing, pop, kAll).has_value());
  const TaskCompat noAB = [](const TaskId& x, const TaskId& y) { return !((x == "a" && y == "b") || (x == "b" && y == "a")); };
  EXPECT_TRUE(check_partition(ok, pop, noAB).has_value());
}
