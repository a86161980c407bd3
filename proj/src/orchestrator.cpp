#include "ifl/orchestrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>

#include <fmt/format.h>

#include "ifl/domain_json.hpp"
#include "ifl/error.hpp"
#include "ifl/rng.hpp"

namespace ifl {

namespace {

// Uplink carries the trained model and the local reference model; metrics
// and the QoI report ride along at a fixed size.
constexpr std::uint64_t kMetricsBytes = 16;

template <typename T, typename F>
std::vector<T> run_parallel(std::size_t n, int jobs, F&& body) {
  std::vector<std::optional<T>> out(n);
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for num_threads(jobs) schedule(static) if (jobs > 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> result;
  result.reserve(n);
  for (auto& o : out) result.push_back(std::move(*o));
  return result;
}

bool finite_sample(const Sample& s, std::size_t dim) {
  if (s.values.size() != dim || !std::isfinite(s.target)) return false;
  return std::all_of(s.values.begin(), s.values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

std::size_t holdout_size(std::size_t n) { return n < 2 ? 0 : std::max<std::size_t>(1, n / 5); }

FLClient::FLClient(ClientId id, AspectType aspectType, int nRef) : id_(std::move(id)), aspectType_(std::move(aspectType)), nRef_(nRef) {
  validate(aspectType_);
  if (nRef_ < 1) fail(ErrorCode::ValidationFailed, id_, "nRef must be >= 1");
}

FLClient::Local& FLClient::local(const TaskId& task) {
  const auto it = tasks_.find(task);
  if (it == tasks_.end()) fail(ErrorCode::UnresolvedReference, task, "client " + id_ + " holds no data for task");
  return it->second;
}

const FLClient::Local& FLClient::local(const TaskId& task) const { return const_cast<FLClient*>(this)->local(task); }

void FLClient::attach(const TaskId& task, Dataset data) {
  ClientScope scope;
  dataset_conforms(data, aspectType_);
  tasks_.insert_or_assign(task, Local{ClientPrivate<Dataset>(id_, std::move(data)), std::nullopt});
}

DataUpdateNotice FLClient::append(const TaskId& task, std::vector<Sample> samples, Tick now) {
  ClientScope scope;
  auto& ds = local(task).data.get_mut();
  Dataset combined = ds;
  combined.samples.insert(combined.samples.end(), std::make_move_iterator(samples.begin()), std::make_move_iterator(samples.end()));
  dataset_conforms(combined, aspectType_);
  ds = std::move(combined);
  return {task, id_, ds.size(), now};
}

FLClient::Split FLClient::preprocess(const Dataset& ds) const {
  Split s;
  s.train.aspectTypeId = s.holdout.aspectTypeId = ds.aspectTypeId;
  std::vector<const Sample*> clean;
  for (const auto& x : ds.samples)
    if (finite_sample(x, aspectType_.dimension())) clean.push_back(&x);
  const std::size_t cut = clean.size() - holdout_size(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) (i < cut ? s.train : s.holdout).samples.push_back(*clean[i]);
  return s;
}

ClientUpdate FLClient::train(const TrainInstruction& instruction, int threads) {
  ClientScope scope;
  auto& l = local(instruction.taskId);
  const auto& raw = l.data.get();
  const auto split = preprocess(raw);
  auto result = local_train(instruction.global, split.train, instruction.config, threads);
  if (!l.reference || l.reference->dim() != instruction.global.dim()) l.reference = instruction.global;
  l.reference = local_train(*l.reference, split.train, instruction.config, threads).params;

  ClientUpdate u;
  u.taskId = instruction.taskId;
  u.clientId = id_;
  u.params = std::move(result.params);
  u.baseVersion = instruction.global.version;
  u.trainMetrics = result.metrics;
  u.qoi = qoi_score(raw, aspectType_.dimension(), nRef_, id_, instruction.taskId);
  u.trainSampleCount = split.train.size();
  u.reference = *l.reference;
  return u;
}

EvalReport FLClient::evaluate(const TaskId& task, const ModelParams& global) const {
  ClientScope scope;
  const auto split = preprocess(local(task).data.get());
  return {task, id_, ifl::evaluate(global, split.holdout.empty() ? split.train : split.holdout)};
}

std::size_t FLClient::sample_count(const TaskId& task) const {
  ClientScope scope;
  return local(task).data.get().size();
}

void validate(const RunSettings& s) {
  if (!(s.tauSplit > 0.0) || !(s.tauMerge > 0.0) || !(s.tauMerge < s.tauSplit))
    fail(ErrorCode::ValidationFailed, "settings", "need 0 < tauMerge < tauSplit");
  if (!(s.alpha0 > 0.0 && s.alpha0 <= 1.0)) fail(ErrorCode::ValidationFailed, "settings", "alpha0 must lie in (0, 1]");
  if (s.nRef < 1) fail(ErrorCode::ValidationFailed, "settings", "nRef must be >= 1");
  if (s.cohortUpdatePeriod < 0) fail(ErrorCode::ValidationFailed, "settings", "cohortUpdatePeriod must be >= 0");
  if (s.probeSize < 1) fail(ErrorCode::ValidationFailed, "settings", "probeSize must be >= 1");
  if (!(s.probeLow < s.probeHigh)) fail(ErrorCode::ValidationFailed, "settings", "probeLow must be below probeHigh");
  validate(s.costWeights);
  if (s.maxExhaustive < 0) fail(ErrorCode::ValidationFailed, "settings", "maxExhaustive must be >= 0");
  if (s.jobs < 1) fail(ErrorCode::ValidationFailed, "settings", "jobs must be >= 1");
}

Orchestrator::Orchestrator(Catalog& catalog, Network network, RunSettings settings, std::uint64_t seed)
    : catalog_(&catalog),
      network_(std::move(network)),
      settings_(std::move(settings)),
      seed_(seed),
      clock_(network_, rng::derive_seed(seed, 0, "network")) {
  validate(settings_);
}

void Orchestrator::connect(FLClient& client) { clients_[client.id()] = &client; }

void Orchestrator::set_processing_ticks(const TaskId& task, Tick ticks) {
  if (ticks < 1) fail(ErrorCode::ValidationFailed, task, "processing ticks must be >= 1");
  const auto it = tasks_.find(task);
  if (it == tasks_.end()) fail(ErrorCode::UnresolvedReference, task, "unknown task");
  it->second.processingTicks = ticks;
}

CohortId Orchestrator::next_cohort_id() { return fmt::format("c{:04}", nextCohort_++); }

bool Orchestrator::tasks_compatible(const TaskId& a, const TaskId& b) const {
  if (a == b) return true;
  const auto& ta = tasks_.at(a).task;
  const auto& tb = tasks_.at(b).task;
  return ta.modelSpecId == tb.modelSpecId && catalog_->compatible(ta.clientId, tb.clientId);
}

FLClient& Orchestrator::endpoint(const ClientId& id) const {
  const auto it = clients_.find(id);
  if (it == clients_.end()) fail(ErrorCode::UnknownClient, id, "no connected client endpoint");
  return *it->second;
}

std::pair<PopulationKey, CohortId> Orchestrator::submit_task(const FLTask& task) {
  if (!catalog_->is_registered(task.clientId)) fail(ErrorCode::UnknownClient, task.clientId, "client is not registered");
  if (task.id.empty()) fail(ErrorCode::ValidationFailed, "", "task id must not be empty");
  validate(task.config);
  if (const auto it = tasks_.find(task.id); it != tasks_.end()) {
    if (it->second.task != task) fail(ErrorCode::ValidationFailed, task.id, "task id already names a different task");
    for (const auto& [id, cs] : cohorts_)
      if (cs.cohort.taskIds.contains(task.id)) return {it->second.key, id};
  }

  const auto key = population_key(task, *catalog_);
  const auto asset = *catalog_->find_asset(task.assetId);
  const auto device = catalog_->find_device(asset.edgeDeviceId);
  if (!device) fail(ErrorCode::ValidationFailed, task.id, "asset " + asset.id + " has no registered edge device");
  if (device->organizationId != task.clientId) fail(ErrorCode::ValidationFailed, task.id, "asset belongs to another organization");
  const auto spec = *catalog_->find_model_spec(task.modelSpecId);
  const auto aspect = catalog_->find_aspect_type(spec.aspectTypeId);
  if (!aspect) fail(ErrorCode::UnresolvedReference, spec.aspectTypeId, "model spec names an unknown aspect type");
  if (!catalog_->find_asset_type(asset.assetTypeId)->aspectTypeIds.contains(spec.aspectTypeId))
    fail(ErrorCode::ValidationFailed, task.id, "asset type does not expose the model's aspect type");

  auto [pit, created] = populations_.try_emplace(key);
  auto& pop = pit->second;
  if (created) {
    pop.population.key = key;
    pop.probe = make_probe_set(*aspect, settings_.probeSize, rng::derive_seed(seed_, 0, "probe"), settings_.probeLow, settings_.probeHigh);
  }

  std::vector<FLCohort> existing;
  for (const auto& id : pop.cohortIds) existing.push_back(cohorts_.at(id).cohort);
  const auto criteria = catalog_->criteria_of(task.clientId);
  const MemberAccepts accepts = [&](const TaskId& member) {
    const auto& other = tasks_.at(member).task;
    return other.modelSpecId == task.modelSpecId && catalog_->compatible(task.clientId, other.clientId);
  };
  const auto placement = initial_assign(task, criteria ? &*criteria : nullptr, existing, accepts);

  CohortId cohort = placement.cohort;
  if (placement.kind != CohortPlacement::Kind::Existing) {
    cohort = next_cohort_id();
    CohortState cs;
    cs.cohort = FLCohort{cohort, key, {}, placement.kind == CohortPlacement::Kind::NewDefault};
    cs.modelSpecId = task.modelSpecId;
    cohorts_.emplace(cohort, std::move(cs));
    pop.cohortIds.insert(cohort);
  }
  auto& cs = cohorts_.at(cohort);
  cs.cohort.taskIds.insert(task.id);
  cs.stopped.reset();
  TaskState ts;
  ts.task = task;
  ts.key = key;
  ts.deviceId = asset.edgeDeviceId;
  tasks_.emplace(task.id, std::move(ts));
  pop.population.taskIds.insert(task.id);
  return {key, cohort};
}

FLPlan Orchestrator::compile_plan(std::span<const TaskId> tasks, const TaskConfig& cfg, const PlanId& id) const {
  if (tasks.empty()) fail(ErrorCode::ValidationFailed, id, "plan needs at least one task");
  std::set<TaskId> unique(tasks.begin(), tasks.end());
  const auto state = [&](const TaskId& t) -> const TaskState& {
    const auto it = tasks_.find(t);
    if (it == tasks_.end()) fail(ErrorCode::UnresolvedReference, t, "unknown task");
    return it->second;
  };
  const auto& spec = state(*unique.begin()).task.modelSpecId;
  bool training = false;
  std::map<DeviceId, Tick> demand;
  for (const auto& t : unique) {
    const auto& ts = state(t);
    if (ts.task.modelSpecId != spec) fail(ErrorCode::MixedModelSpecs, id, fmt::format("{} uses {}, {} uses {}", *unique.begin(), spec, t, ts.task.modelSpecId));
    training = training || ts.task.kind == TaskKind::Training;
    demand[ts.deviceId] += ts.processingTicks;
  }

  FLPlan plan;
  plan.id = id;
  plan.taskIds.assign(unique.begin(), unique.end());
  if (training) {
    plan.clientSteps = {ClientStep::Preprocess, ClientStep::Train, ClientStep::Evaluate};
    plan.serverStep = cfg.mode == SyncMode::Sync ? ServerStep::FedAvgAggregate : ServerStep::AsyncMerge;
  } else {
    plan.clientSteps = {ClientStep::Preprocess, ClientStep::Evaluate};
    plan.serverStep = ServerStep::CollectMetrics;
  }
  DeviceLoads loads;
  for (const auto& [dev, dur] : demand) {
    plan.schedule.push_back({dev, 0, dur});
    loads[dev] = clock_.now();
  }
  const std::array<FLPlan, 1> one{plan};
  const auto placed = build_schedule(one, loads, freshness_);
  for (auto& e : plan.schedule)
    for (const auto& p : placed.entries)
      if (p.deviceId == e.deviceId) e.startTick = p.startTick;
  return plan;
}

ModelParams& Orchestrator::ensure_global(CohortState& cs) {
  if (!cs.global) {
    const auto spec = catalog_->find_model_spec(cs.modelSpecId);
    if (!spec) fail(ErrorCode::UnresolvedReference, cs.modelSpecId, "unknown model spec");
    cs.global = init_model(*spec, rng::derive_seed(seed_, rng::hash(cs.cohort.id), "init"));
  }
  return *cs.global;
}

std::vector<TaskId> Orchestrator::ordered_tasks(const FLPlan& plan) const {
  std::vector<TaskId> out(plan.taskIds.begin(), plan.taskIds.end());
  std::sort(out.begin(), out.end(), [&](const TaskId& a, const TaskId& b) {
    return std::tie(tasks_.at(a).task.clientId, a) < std::tie(tasks_.at(b).task.clientId, b);
  });
  return out;
}

std::vector<ClientUpdate> Orchestrator::collect_updates(const std::vector<TaskId>& tasks, const ModelParams& global, const TaskConfig& cfg) {
  std::vector<TaskId> trainers;
  std::vector<FLClient*> endpoints;
  for (const auto& t : tasks) {
    const auto& ts = tasks_.at(t);
    if (ts.task.kind != TaskKind::Training) continue;
    trainers.push_back(t);
    endpoints.push_back(&endpoint(ts.task.clientId));
  }
  auto results = run_parallel<ClientUpdate>(trainers.size(), settings_.jobs, [&](std::size_t i) {
    return endpoints[i]->train(TrainInstruction{trainers[i], global, cfg});
  });
  for (auto& u : results) updates_.send(std::move(u));
  return updates_.drain();
}

std::vector<EvalReport> Orchestrator::collect_evaluations(const std::vector<TaskId>& tasks, const ModelParams& global) {
  std::vector<FLClient*> endpoints;
  for (const auto& t : tasks) endpoints.push_back(&endpoint(tasks_.at(t).task.clientId));
  auto results = run_parallel<EvalReport>(tasks.size(), settings_.jobs, [&](std::size_t i) { return endpoints[i]->evaluate(tasks[i], global); });
  for (auto& r : results) evaluations_.send(std::move(r));
  return evaluations_.drain();
}

void Orchestrator::absorb(const ClientUpdate& u) {
  auto& ts = tasks_.at(u.taskId);
  ts.lastParams = u.params;
  ts.reference = u.reference;
  ts.lastQoi = u.qoi;
  ts.trainSampleCount = u.trainSampleCount;
  ts.sampleCount = u.qoi.sampleCount;
}


std::map<TaskId, Tick> Orchestrator::send_uplinks(const std::vector<TaskId>& tasks, const std::map<TaskId, ClientUpdate>& updates) {
  std::map<TaskId, Tick> up;
  for (const auto& t : tasks) {
    const auto it = updates.find(t);
    const auto bytes =
        it == updates.end() ? kMetricsBytes : payload_size(it->second.params) + payload_size(it->second.reference) + kMetricsBytes;
    up[t] = clock_.send(tasks_.at(t).task.clientId, kServerNode, bytes);
  }
  return up;
}

RoundMetrics Orchestrator::finish_round(const CohortId& cohort, const std::vector<TaskId>& tasks,
                                        const std::map<TaskId, ClientUpdate>& updates, const std::map<TaskId, Tick>& uplinks,
                                        const ModelParams& before, const ModelParams& after, int round, Tick start) {
  std::map<TaskId, EvalMetrics> evals;
  for (const auto& r : collect_evaluations(tasks, after)) evals[r.taskId] = r.metrics;

  RoundMetrics m;
  m.round = round;
  m.cohortId = cohort;
  m.globalParamsVersion = after.version;
  m.convergenceDelta = max_abs_diff(before, after);
  m.startTick = start;
  for (const auto& t : tasks) {
    const auto& ts = tasks_.at(t);
    TaskRoundMetrics tm;
    tm.taskId = t;
    tm.clientId = ts.task.clientId;
    if (const auto it = updates.find(t); it != updates.end()) {
      tm.trainMetrics = it->second.trainMetrics;
      tm.qoiReport = it->second.qoi;
    }
    tm.evalMetrics = evals.at(t);
    tm.uplinkTicks = uplinks.at(t);
    tm.computeTicks = ts.processingTicks;
    m.perTask.push_back(std::move(tm));
  }
  for (auto& tm : m.perTask) {
    tm.downlinkTicks = clock_.send(kServerNode, tm.clientId, payload_size(after));
    m.simulatedTicks = std::max(m.simulatedTicks, tm.uplinkTicks + tm.computeTicks + tm.downlinkTicks);
  }
  return m;
}

SyncRoundResult Orchestrator::run_sync_round(const CohortId& cohort, const FLPlan& plan, const TaskConfig& cfg, int round, Tick start) {
  const auto cit = cohorts_.find(cohort);
  if (cit == cohorts_.end()) fail(ErrorCode::UnresolvedReference, cohort, "unknown cohort");
  auto& cs = cit->second;
  const ModelParams before = ensure_global(cs);
  const auto tasks = ordered_tasks(plan);

  std::map<TaskId, ClientUpdate> byTask;
  for (auto& u : collect_updates(tasks, before, cfg)) {
    absorb(u);
    byTask.emplace(u.taskId, std::move(u));
  }
  const auto uplinks = send_uplinks(tasks, byTask);

  ModelParams after = before;
  if (!byTask.empty()) {
    std::vector<ContributionEntry> entries;
    for (const auto& [t, u] : byTask) entries.push_back({u.trainSampleCount, u.qoi.score});
    std::vector<double> weights;
    try {
      weights = contribution_weights(entries);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AllZeroMass) throw;
      return {before, std::nullopt};
    }
    std::vector<WeightedParams> weighted;
    std::size_t k = 0;
    for (const auto& [t, u] : byTask) weighted.push_back({u.params, weights[k++]});
    after = federated_average(weighted);
  }
  cs.global = after;
  return {after, finish_round(cohort, tasks, byTask, uplinks, before, after, round, start)};
}

ModelParams Orchestrator::run_async_step(const CohortId& cohort, const ClientUpdate& update) {
  const auto cit = cohorts_.find(cohort);
  if (cit == cohorts_.end()) fail(ErrorCode::UnresolvedReference, cohort, "unknown cohort");
  auto& global = ensure_global(cit->second);
  if (update.baseVersion > global.version) fail(ErrorCode::ValidationFailed, update.taskId, "update is based on a future global version");
  global = async_merge(global, update.params, global.version - update.baseVersion, settings_.alpha0);
  return global;
}

SyncRoundResult Orchestrator::run_async_round(const CohortId& cohort, const FLPlan& plan, const TaskConfig& cfg, int round, Tick start) {
  const auto cit = cohorts_.find(cohort);
  if (cit == cohorts_.end()) fail(ErrorCode::UnresolvedReference, cohort, "unknown cohort");
  const ModelParams before = ensure_global(cit->second);
  const auto tasks = ordered_tasks(plan);

  std::map<TaskId, ClientUpdate> byTask;
  for (auto& u : collect_updates(tasks, before, cfg)) {
    absorb(u);
    byTask.emplace(u.taskId, std::move(u));
  }
  const auto uplinks = send_uplinks(tasks, byTask);

  // Merge in arrival order; ties keep the client order of `tasks`.
  std::vector<const ClientUpdate*> arrivals;
  for (const auto& t : tasks)
    if (const auto it = byTask.find(t); it != byTask.end()) arrivals.push_back(&it->second);
  const auto arrival = [&](const ClientUpdate* u) { return tasks_.at(u->taskId).processingTicks + uplinks.at(u->taskId); };
  std::stable_sort(arrivals.begin(), arrivals.end(), [&](const auto* a, const auto* b) { return arrival(a) < arrival(b); });

  bool merged = false;
  for (const auto* u : arrivals) {
    if (!(u->qoi.score > 0.0) || u->trainSampleCount == 0) continue;
    run_async_step(cohort, *u);
    merged = true;
  }
  if (!arrivals.empty() && !merged) return {before, std::nullopt};
  const ModelParams after = *cit->second.global;
  return {after, finish_round(cohort, tasks, byTask, uplinks, before, after, round, start)};
}

LatencyTable Orchestrator::latency_table(const std::vector<ClientId>& clients, std::size_t dim) const {
  const auto bytes = payload_size(dim);
  const auto hop = [&](const NodeId& a, const NodeId& b) {
    const auto l = network_.link(a, b);
    return static_cast<double>(l.baseLatencyTicks + (static_cast<std::int64_t>(bytes) + l.bytesPerTick - 1) / l.bytesPerTick);
  };
  LatencyTable table;
  for (std::size_t i = 0; i < clients.size(); ++i)
    for (std::size_t j = i + 1; j < clients.size(); ++j) {
      const auto& a = clients[i];
      const auto& b = clients[j];
      if (a == b) continue;
      table.set(a, b, network_.has_link(a, b) ? hop(a, b) : hop(a, kServerNode) + hop(kServerNode, b));
    }
  return table;
}

ModelParams Orchestrator::reseed(const std::set<TaskId>& members, const ModelSpecId& spec, const CohortId& id) const {
  std::vector<const TaskState*> trained;
  for (const auto& t : members)
    if (const auto& ts = tasks_.at(t); ts.lastParams) trained.push_back(&ts);
  if (trained.empty()) {
    const auto s = catalog_->find_model_spec(spec);
    if (!s) fail(ErrorCode::UnresolvedReference, spec, "unknown model spec");
    return init_model(*s, rng::derive_seed(seed_, rng::hash(id), "init"));
  }
  std::vector<ContributionEntry> entries;
  for (const auto* ts : trained) entries.push_back({ts->trainSampleCount, ts->lastQoi ? ts->lastQoi->score : 0.0});
  std::vector<double> weights;
  try {
    weights = contribution_weights(entries);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AllZeroMass) throw;
    weights.assign(trained.size(), 1.0 / static_cast<double>(trained.size()));
  }
  std::vector<WeightedParams> weighted;
  for (std::size_t k = 0; k < trained.size(); ++k) weighted.push_back({*trained[k]->lastParams, weights[k]});
  return federated_average(weighted);
}

void Orchestrator::update_population(PopulationState& pop, int round, RunReport& report) {
  std::vector<FLCohort> before;
  std::map<TaskId, CohortId> cohortOf;
  for (const auto& id : pop.cohortIds) {
    before.push_back(cohorts_.at(id).cohort);
    for (const auto& t : before.back().taskIds) cohortOf[t] = id;
  }
  std::map<TaskId, ModelParams> params;
  for (const auto& t : pop.population.taskIds) {
    const auto& ts = tasks_.at(t);
    params[t] = ts.reference ? *ts.reference : ensure_global(cohorts_.at(cohortOf.at(t)));
  }
  const TaskCompat compat = [this](const TaskId& a, const TaskId& b) { return tasks_compatible(a, b); };

  const auto changes = update_cohorts(before, params, pop.probe, {settings_.tauSplit, settings_.tauMerge, settings_.jobs}, compat,
                                      [this] { return next_cohort_id(); });
  auto after = apply_changes(before, changes);
  for (const auto& c : changes.changes) report.cohortEvents.push_back({round, c});

  // Resource optimizer over the cohorts each task may join without breaking
  // the similarity bound or compatibility.
  Assignment current;
  for (const auto& c : after)
    for (const auto& t : c.taskIds) current[t] = c.id;
  OptimizeRequest request;
  request.maxExhaustive = settings_.maxExhaustive;
  AssignmentStats stats;
  std::set<ClientId> clientSet;
  for (const auto& [t, c] : current) {
    request.tasks.push_back(t);
    auto& cands = request.cohortCandidates[t];
    cands.push_back(c);
    for (const auto& other : after) {
      if (other.id == c) continue;
      const bool fits = std::all_of(other.taskIds.begin(), other.taskIds.end(), [&](const TaskId& m) {
        return compat(t, m) && pairwise_distance(params.at(t), params.at(m), pop.probe) <= settings_.tauSplit;
      });
      if (fits) cands.push_back(other.id);
    }
    const auto& ts = tasks_.at(t);
    stats.processingCost[t] = static_cast<double>(ts.processingTicks);
    stats.taskClient[t] = ts.task.clientId;
    clientSet.insert(ts.task.clientId);
  }
  stats.latency = latency_table({clientSet.begin(), clientSet.end()}, pop.probe.inputs.front().size());
  stats.currentAssignment = current;

  OptimizerEvent event;
  event.round = round;
  event.strategy = static_cast<int>(request.tasks.size()) <= request.maxExhaustive ? "exhaustive" : "greedy";
  event.assignment = optimize_assignment(request, stats, settings_.costWeights, compat);
  event.cost = assignment_cost(event.assignment, stats, settings_.costWeights);
  event.currentCost = assignment_cost(current, stats, settings_.costWeights);
  for (const auto& [t, c] : event.assignment) {
    if (current.at(t) == c) continue;
    event.moves.push_back({t, current.at(t), c});
    for (auto& cohort : after) {
      if (cohort.id == current.at(t)) cohort.taskIds.erase(t);
      if (cohort.id == c) cohort.taskIds.insert(t);
    }
  }
  std::erase_if(after, [](const FLCohort& c) { return c.taskIds.empty(); });
  report.optimizerEvents.push_back(std::move(event));

  if (const auto problem = check_partition(after, pop.population.taskIds, compat))
    fail(ErrorCode::ValidationFailed, to_string(pop.population.key), *problem);

  std::map<CohortId, std::set<TaskId>> previous;
  for (const auto& c : before) previous[c.id] = c.taskIds;
  std::set<CohortId> keep;
  for (const auto& c : after) {
    keep.insert(c.id);
    if (const auto it = previous.find(c.id); it != previous.end() && it->second == c.taskIds) continue;
    const auto spec = tasks_.at(*c.taskIds.begin()).task.modelSpecId;
    auto& cs = cohorts_[c.id];
    cs.cohort = c;
    cs.modelSpecId = spec;
    cs.global = reseed(c.taskIds, spec, c.id);
    cs.stopped.reset();
  }
  for (const auto& id : pop.cohortIds)
    if (!keep.contains(id)) cohorts_.erase(id);
  pop.cohortIds = std::move(keep);
}

RunReport Orchestrator::run_training(const PopulationKey& population, const TaskConfig& cfg, int maxRounds) {
  validate(cfg);
  if (maxRounds < 0) fail(ErrorCode::ValidationFailed, "", "maxRounds must be >= 0");
  const auto pit = populations_.find(population);
  if (pit == populations_.end()) fail(ErrorCode::UnresolvedReference, to_string(population), "unknown population");
  auto& pop = pit->second;
  if (pop.population.taskIds.empty()) fail(ErrorCode::ValidationFailed, to_string(population), "population has no tasks");

  RunReport report;
  for (const auto& id : pop.cohortIds) {
    cohorts_.at(id).stopped.reset();
    pendingCycles_.erase(id);
  }

  for (int round = 1; round <= maxRounds; ++round) {
    std::vector<CohortId> active;
    for (const auto& id : pop.cohortIds)
      if (!cohorts_.at(id).stopped) active.push_back(id);
    if (active.empty()) break;

    std::vector<FLPlan> plans;
    DeviceLoads loads;
    for (const auto& id : active) {
      const auto& members = cohorts_.at(id).cohort.taskIds;
      const std::vector<TaskId> tasks(members.begin(), members.end());
      plans.push_back(compile_plan(tasks, cfg, fmt::format("plan-{}-r{}", id, round)));
      for (const auto& e : plans.back().schedule) loads[e.deviceId] = 0;
    }
    const auto schedule = build_schedule(plans, loads, freshness_);

    const Tick roundStart = clock_.now();
    Tick roundEnd = roundStart;
    for (std::size_t i = 0; i < active.size(); ++i) {
      const Tick start = roundStart + schedule.start_of(plans[i].id).value_or(0);
      auto result = cfg.mode == SyncMode::Sync ? run_sync_round(active[i], plans[i], cfg, round, start)
                                               : run_async_round(active[i], plans[i], cfg, round, start);
      auto& cs = cohorts_.at(active[i]);
      if (!result.metrics) {
        cs.stopped = StopReason::BreakUp;
        continue;
      }
      roundEnd = std::max(roundEnd, start + result.metrics->simulatedTicks);
      if (result.metrics->convergenceDelta < cfg.convergenceEps) cs.stopped = StopReason::Converged;
      report.rounds.push_back(std::move(*result.metrics));
    }
    clock_.advance_to(roundEnd);

    if (settings_.cohortsEnabled && settings_.cohortUpdatePeriod > 0 && round % settings_.cohortUpdatePeriod == 0 && round < maxRounds)
      update_population(pop, round, report);
  }

  bool anyActive = false;
  bool anyBreakUp = false;
  for (const auto& id : pop.cohortIds) {
    const auto& s = cohorts_.at(id).stopped;
    anyActive = anyActive || !s;
    anyBreakUp = anyBreakUp || (s && *s == StopReason::BreakUp);
  }
  report.stopReason = anyActive ? StopReason::MaxRounds : anyBreakUp ? StopReason::BreakUp : StopReason::Converged;
  report.finalAssignment = assignment(population);
  for (const auto& id : pop.cohortIds)
    if (const auto& g = cohorts_.at(id).global) report.finalParams[id] = *g;
  return report;
}

void Orchestrator::record_data_update(const TaskId& task, std::vector<Sample> samples) {
  const auto it = tasks_.find(task);
  if (it == tasks_.end()) fail(ErrorCode::UnresolvedReference, task, "unknown task");
  auto& ts = it->second;
  notices_.send(endpoint(ts.task.clientId).append(task, std::move(samples), clock_.now()));
  for (const auto& n : notices_.drain()) {
    tasks_.at(n.taskId).sampleCount = n.sampleCount;
    freshness_[n.taskId] = n.tick;
  }
  if (ts.task.config.repeatEverySec) {
    for (auto& [id, cs] : cohorts_)
      if (cs.cohort.taskIds.contains(task)) {
        cs.stopped.reset();
        pendingCycles_.insert(id);
      }
  }
}

std::vector<PopulationKey> Orchestrator::populations() const {
  std::vector<PopulationKey> out;
  for (const auto& [k, p] : populations_) out.push_back(k);
  return out;
}

std::vector<FLCohort> Orchestrator::cohorts(const PopulationKey& key) const {
  std::vector<FLCohort> out;
  if (const auto it = populations_.find(key); it != populations_.end())
    for (const auto& id : it->second.cohortIds) out.push_back(cohorts_.at(id).cohort);
  return out;
}

std::optional<ModelParams> Orchestrator::global_params(const CohortId& cohort) const {
  const auto it = cohorts_.find(cohort);
  return it == cohorts_.end() ? std::nullopt : it->second.global;
}

Assignment Orchestrator::assignment(const PopulationKey& key) const {
  Assignment out;
  for (const auto& c : cohorts(key))
    for (const auto& t : c.taskIds) out[t] = c.id;
  return out;
}

std::uint64_t Orchestrator::server_sample_count(const TaskId& task) const {
  const auto it = tasks_.find(task);
  if (it == tasks_.end()) fail(ErrorCode::UnresolvedReference, task, "unknown task");
  return it->second.sampleCount;
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::Converged: return "Converged";
    case StopReason::MaxRounds: return "MaxRounds";
    case StopReason::BreakUp: return "BreakUp";
  }
  return "?";
}

void to_json(nlohmann::json& j, const RunSettings& s) {
  j = {{"tauSplit", s.tauSplit},
       {"tauMerge", s.tauMerge},
       {"alpha0", s.alpha0},
       {"nRef", s.nRef},
       {"cohortUpdatePeriod", s.cohortUpdatePeriod},
       {"probeSize", s.probeSize},
       {"probeLow", s.probeLow},
       {"probeHigh", s.probeHigh},
       {"costWeights", s.costWeights},
       {"maxExhaustive", s.maxExhaustive},
       {"cohortsEnabled", s.cohortsEnabled},
       {"jobs", s.jobs}};
}

void from_json(const nlohmann::json& j, RunSettings& s) {
  const RunSettings d;
  s.tauSplit = value_or(j, "tauSplit", d.tauSplit);
  s.tauMerge = value_or(j, "tauMerge", d.tauMerge);
  s.alpha0 = value_or(j, "alpha0", d.alpha0);
  s.nRef = value_or(j, "nRef", d.nRef);
  s.cohortUpdatePeriod = value_or(j, "cohortUpdatePeriod", d.cohortUpdatePeriod);
  s.probeSize = value_or(j, "probeSize", d.probeSize);
  s.probeLow = value_or(j, "probeLow", d.probeLow);
  s.probeHigh = value_or(j, "probeHigh", d.probeHigh);
  s.costWeights = value_or(j, "costWeights", d.costWeights);
  s.maxExhaustive = value_or(j, "maxExhaustive", d.maxExhaustive);
  s.cohortsEnabled = value_or(j, "cohortsEnabled", d.cohortsEnabled);
  s.jobs = value_or(j, "jobs", d.jobs);
  validate(s);
}

void to_json(nlohmann::json& j, const TaskRoundMetrics& m) {
  j = {{"taskId", m.taskId},           {"clientId", m.clientId},         {"evalMetrics", m.evalMetrics},
       {"uplinkTicks", m.uplinkTicks}, {"downlinkTicks", m.downlinkTicks}, {"computeTicks", m.computeTicks}};
  put_optional(j, "trainMetrics", m.trainMetrics);
  put_optional(j, "qoiReport", m.qoiReport);
}

void to_json(nlohmann::json& j, const RoundMetrics& m) {
  j = {{"round", m.round},
       {"cohortId", m.cohortId},
       {"globalParamsVersion", m.globalParamsVersion},
       {"convergenceDelta", m.convergenceDelta},
       {"startTick", m.startTick},
       {"simulatedTicks", m.simulatedTicks},
       {"perTask", m.perTask}};
}

void to_json(nlohmann::json& j, const OptimizerEvent& e) {
  auto moves = nlohmann::json::array();
  for (const auto& m : e.moves) moves.push_back({{"task", m.task}, {"from", m.from}, {"to", m.to}});
  j = {{"round", e.round},
       {"strategy", e.strategy},
       {"assignment", e.assignment},
       {"cost", e.cost},
       {"currentCost", e.currentCost},
       {"moves", moves}};
}

void to_json(nlohmann::json& j, const RunReport& r) {
  auto events = nlohmann::json::array();
  for (const auto& e : r.cohortEvents) {
    auto ev = to_json(e.change);
    ev["round"] = e.round;
    events.push_back(std::move(ev));
  }
  j = {{"scenarioId", r.scenarioId},
       {"stopReason", to_string(r.stopReason)},
       {"rounds", r.rounds},
       {"cohortEvents", events},
       {"optimizerEvents", r.optimizerEvents},
       {"finalAssignment", r.finalAssignment},
       {"finalParams", r.finalParams}};
  if (!r.groundTruth.empty()) j["groundTruth"] = r.groundTruth;
}

}  // namespace ifl
