#pragma once

// FL server (task manager, plan processor, metrics store) and the FL client
// endpoint that owns each organization's private data.
//
// Clients answer server instructions with wire messages only: model
// parameters, training/evaluation metrics and QoI reports. Their datasets sit
// in ClientPrivate storage and are read inside ClientScope.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "ifl/cohort.hpp"
#include "ifl/domain.hpp"
#include "ifl/learning.hpp"
#include "ifl/privacy.hpp"
#include "ifl/qoi.hpp"
#include "ifl/registry.hpp"
#include "ifl/scheduling.hpp"
#include "ifl/simnet.hpp"

namespace ifl {

// Server -> client.
struct TrainInstruction {
  TaskId taskId;
  ModelParams global;
  TaskConfig config;
};

// Client -> server.
struct ClientUpdate {
  TaskId taskId;
  ClientId clientId;
  ModelParams params;
  std::uint64_t baseVersion = 0;
  TrainMetrics trainMetrics;
  QoIReport qoi;
  std::uint64_t trainSampleCount = 0;
  // Local-only model trained on the client's own data from its first global
  // model on; the server compares these to measure task similarity.
  ModelParams reference;

  auto fields() const { return std::tie(taskId, clientId, params, baseVersion, trainMetrics, qoi, trainSampleCount, reference); }
};

struct EvalReport {
  TaskId taskId;
  ClientId clientId;
  EvalMetrics metrics;

  auto fields() const { return std::tie(taskId, clientId, metrics); }
};

struct DataUpdateNotice {
  TaskId taskId;
  ClientId clientId;
  std::uint64_t sampleCount = 0;
  Tick tick = 0;

  auto fields() const { return std::tie(taskId, clientId, sampleCount, tick); }
};

static_assert(WireMessage<ClientUpdate> && WireMessage<EvalReport> && WireMessage<DataUpdateNotice>);
static_assert(!WireMessage<Dataset> && !WireMessage<Sample>);

// Held-out split: the last fifth of the samples by timestamp (at least one
// sample once there are two).
std::size_t holdout_size(std::size_t n);

class FLClient {
 public:
  FLClient(ClientId id, AspectType aspectType, int nRef = kDefaultReferenceSamples);

  const ClientId& id() const { return id_; }

  // Throws SchemaMismatch.
  void attach(const TaskId& task, Dataset data);
  // Appends samples with timestamps after the last stored one. Throws
  // SchemaMismatch, UnresolvedReference.
  DataUpdateNotice append(const TaskId& task, std::vector<Sample> samples, Tick now);

  // Preprocess (drop non-finite samples, hold out the tail), local_train on
  // the training split, QoI on the raw data.
  ClientUpdate train(const TrainInstruction& instruction, int threads = 1);
  // Evaluate `global` on the held-out split.
  EvalReport evaluate(const TaskId& task, const ModelParams& global) const;

  std::size_t sample_count(const TaskId& task) const;

 private:
  struct Local {
    ClientPrivate<Dataset> data;
    std::optional<ModelParams> reference;
  };
  struct Split {
    Dataset train;
    Dataset holdout;
  };
  Split preprocess(const Dataset& ds) const;
  Local& local(const TaskId& task);
  const Local& local(const TaskId& task) const;

  ClientId id_;
  AspectType aspectType_;
  int nRef_;
  std::map<TaskId, Local> tasks_;
};

struct RunSettings {
  double tauSplit = 0.5;
  double tauMerge = 0.25;
  double alpha0 = 0.5;
  int nRef = kDefaultReferenceSamples;
  int cohortUpdatePeriod = 5;
  std::size_t probeSize = kDefaultProbeSize;
  double probeLow = -1.0;
  double probeHigh = 1.0;
  CostWeights costWeights;
  int maxExhaustive = kDefaultMaxExhaustive;
  bool cohortsEnabled = true;
  int jobs = 1;

  bool operator==(const RunSettings&) const = default;
};

void validate(const RunSettings& s);

struct TaskRoundMetrics {
  TaskId taskId;
  ClientId clientId;
  std::optional<TrainMetrics> trainMetrics;
  EvalMetrics evalMetrics;
  std::optional<QoIReport> qoiReport;
  Tick uplinkTicks = 0;
  Tick downlinkTicks = 0;
  Tick computeTicks = 0;
};

struct RoundMetrics {
  int round = 0;
  CohortId cohortId;
  std::vector<TaskRoundMetrics> perTask;
  std::uint64_t globalParamsVersion = 0;
  double convergenceDelta = 0.0;
  Tick startTick = 0;
  Tick simulatedTicks = 0;
};

struct CohortEvent {
  int round = 0;
  CohortChange change;
};

struct OptimizerEvent {
  int round = 0;
  std::string strategy;
  Assignment assignment;
  double cost = 0.0;
  double currentCost = 0.0;
  std::vector<TaskMove> moves;
};

enum class StopReason { Converged, MaxRounds, BreakUp };

struct RunReport {
  std::string scenarioId;
  std::vector<RoundMetrics> rounds;
  std::vector<CohortEvent> cohortEvents;
  std::vector<OptimizerEvent> optimizerEvents;
  Assignment finalAssignment;
  std::map<CohortId, ModelParams> finalParams;
  StopReason stopReason = StopReason::MaxRounds;
  std::map<TaskId, std::string> groundTruth;
};

struct SyncRoundResult {
  ModelParams global;
  std::optional<RoundMetrics> metrics;  // empty when the round was skipped (all-zero contribution mass)
};

class Orchestrator {
 public:
  Orchestrator(Catalog& catalog, Network network, RunSettings settings, std::uint64_t seed);
  Orchestrator(const Orchestrator&) = delete;
  Orchestrator& operator=(const Orchestrator&) = delete;

  // The endpoint through which the server reaches a client. Not owned.
  void connect(FLClient& client);
  void set_processing_ticks(const TaskId& task, Tick ticks);

  // Throws UnknownClient, ValidationFailed, UnresolvedReference.
  std::pair<PopulationKey, CohortId> submit_task(const FLTask& task);

  // Throws MixedModelSpecs, UnresolvedDevice.
  FLPlan compile_plan(std::span<const TaskId> tasks, const TaskConfig& cfg, const PlanId& id) const;

  SyncRoundResult run_sync_round(const CohortId& cohort, const FLPlan& plan, const TaskConfig& cfg, int round, Tick start);
  SyncRoundResult run_async_round(const CohortId& cohort, const FLPlan& plan, const TaskConfig& cfg, int round, Tick start);
  // Staleness-decayed merge of one update into the cohort's global model.
  ModelParams run_async_step(const CohortId& cohort, const ClientUpdate& update);

  // maxRounds may be 0. Throws UnresolvedReference for an unknown population.
  RunReport run_training(const PopulationKey& population, const TaskConfig& cfg, int maxRounds);

  // Routes new samples to the owning client; the server only learns the new
  // sample count. Throws SchemaMismatch, UnresolvedReference.
  void record_data_update(const TaskId& task, std::vector<Sample> samples);

  std::vector<PopulationKey> populations() const;
  std::vector<FLCohort> cohorts(const PopulationKey& key) const;
  std::optional<ModelParams> global_params(const CohortId& cohort) const;
  Assignment assignment(const PopulationKey& key) const;
  const Freshness& freshness() const { return freshness_; }
  const std::set<CohortId>& pending_cycles() const { return pendingCycles_; }
  std::uint64_t server_sample_count(const TaskId& task) const;
  const RunSettings& settings() const { return settings_; }
  Tick now() const { return clock_.now(); }

 private:
  struct TaskState {
    FLTask task;
    PopulationKey key;
    DeviceId deviceId;
    Tick processingTicks = 1;
    std::optional<ModelParams> lastParams;
    std::optional<ModelParams> reference;
    std::optional<QoIReport> lastQoi;
    std::uint64_t trainSampleCount = 0;
    std::uint64_t sampleCount = 0;
  };
  struct CohortState {
    FLCohort cohort;
    ModelSpecId modelSpecId;
    std::optional<ModelParams> global;
    std::optional<StopReason> stopped;
  };
  struct PopulationState {
    FLPopulation population;
    std::set<CohortId> cohortIds;
    ProbeSet probe;
  };

  CohortId next_cohort_id();
  bool tasks_compatible(const TaskId& a, const TaskId& b) const;
  FLClient& endpoint(const ClientId& id) const;
  ModelParams& ensure_global(CohortState& cs);
  std::vector<TaskId> ordered_tasks(const FLPlan& plan) const;
  std::vector<ClientUpdate> collect_updates(const std::vector<TaskId>& tasks, const ModelParams& global, const TaskConfig& cfg);
  std::vector<EvalReport> collect_evaluations(const std::vector<TaskId>& tasks, const ModelParams& global);
  void absorb(const ClientUpdate& u);
  std::map<TaskId, Tick> send_uplinks(const std::vector<TaskId>& tasks, const std::map<TaskId, ClientUpdate>& updates);
  RoundMetrics finish_round(const CohortId& cohort, const std::vector<TaskId>& tasks, const std::map<TaskId, ClientUpdate>& updates,
                            const std::map<TaskId, Tick>& uplinks, const ModelParams& before, const ModelParams& after, int round,
                            Tick start);
  void update_population(PopulationState& pop, int round, RunReport& report);
  LatencyTable latency_table(const std::vector<ClientId>& clients, std::size_t dim) const;
  ModelParams reseed(const std::set<TaskId>& members, const ModelSpecId& spec, const CohortId& id) const;

  Catalog* catalog_;
  Network network_;
  RunSettings settings_;
  std::uint64_t seed_;
  SimClock clock_;
  std::map<ClientId, FLClient*> clients_;
  std::map<TaskId, TaskState> tasks_;
  std::map<CohortId, CohortState> cohorts_;
  std::map<PopulationKey, PopulationState> populations_;
  Freshness freshness_;
  std::set<CohortId> pendingCycles_;
  std::uint64_t nextCohort_ = 1;
  Channel<ClientUpdate> updates_;
  Channel<EvalReport> evaluations_;
  Channel<DataUpdateNotice> notices_;
};

std::string_view to_string(StopReason r);

void to_json(nlohmann::json& j, const RunSettings& s);
void from_json(const nlohmann::json& j, RunSettings& s);
void to_json(nlohmann::json& j, const TaskRoundMetrics& m);
void to_json(nlohmann::json& j, const RoundMetrics& m);
void to_json(nlohmann::json& j, const OptimizerEvent& e);
void to_json(nlohmann::json& j, const RunReport& r);

}  // namespace ifl
