#pragma once

// Deterministic simulated network standing in for client/server transport.
// Time is measured in integer ticks.

#include <algorithm>
#include <cstdint>
#include <string>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ifl/domain.hpp"

namespace ifl {

using NodeId = std::string;

inline const NodeId kServerNode = "server";

struct LinkSpec {
  NodeId from;
  NodeId to;
  Tick baseLatencyTicks = 0;
  Tick jitterTicks = 0;
  std::int64_t bytesPerTick = 1;

  bool operator==(const LinkSpec&) const = default;
};

void validate(const LinkSpec& link);

// base + ceil(payload / bytesPerTick) + jitter, jitter uniform on
// [0, jitterTicks] drawn from (seed, messageIndex).
Tick simulate_latency(const LinkSpec& link, std::uint64_t payloadBytes, std::uint64_t seed, std::uint64_t messageIndex);

// 8 bytes per weight, 8 for the bias, 8 for the version counter.
std::uint64_t payload_size(const ModelParams& p);
std::uint64_t payload_size(std::size_t dim);

// Undirected links stored once. Pairs without an explicit link fall back to
// the default link when one is configured.
class Network {
 public:
  Network() = default;
  explicit Network(std::optional<LinkSpec> defaultLink) : defaultLink_(std::move(defaultLink)) {}

  void add_link(const LinkSpec& link);
  // Throws UnresolvedReference when neither a link nor a default exists.
  LinkSpec link(const NodeId& a, const NodeId& b) const;
  bool has_link(const NodeId& a, const NodeId& b) const { return links_.contains(std::minmax(a, b)); }
  std::vector<LinkSpec> links() const;
  const std::optional<LinkSpec>& default_link() const { return defaultLink_; }

 private:
  std::map<std::pair<NodeId, NodeId>, LinkSpec> links_;
  std::optional<LinkSpec> defaultLink_;
};

// Serial message accounting. Every transfer consumes the next message index,
// so latencies depend only on the seed and the order of send() calls.
class SimClock {
 public:
  SimClock(const Network& net, std::uint64_t seed) : net_(&net), seed_(seed) {}

  Tick send(const NodeId& from, const NodeId& to, std::uint64_t payloadBytes);
  Tick now() const { return now_; }
  void advance_to(Tick t) { now_ = std::max(now_, t); }
  std::uint64_t messages_sent() const { return nextMessage_; }

 private:
  const Network* net_;
  std::uint64_t seed_;
  std::uint64_t nextMessage_ = 0;
  Tick now_ = 0;
};

void to_json(nlohmann::json& j, const LinkSpec& l);
void from_json(const nlohmann::json& j, LinkSpec& l);

}  // namespace ifl
