#include "ifl/simnet.hpp"

#include "ifl/error.hpp"
#include "ifl/rng.hpp"

namespace ifl {

void validate(const LinkSpec& link) {
  if (link.baseLatencyTicks < 0 || link.jitterTicks < 0) fail(ErrorCode::ValidationFailed, link.from + "-" + link.to, "latencies must be nonnegative");
  if (link.bytesPerTick < 1) fail(ErrorCode::ValidationFailed, link.from + "-" + link.to, "bytesPerTick must be positive");
}

Tick simulate_latency(const LinkSpec& link, std::uint64_t payloadBytes, std::uint64_t seed, std::uint64_t messageIndex) {
  const auto rate = static_cast<std::uint64_t>(link.bytesPerTick);
  const auto transfer = static_cast<Tick>((payloadBytes + rate - 1) / rate);
  Tick jitter = 0;
  if (link.jitterTicks > 0) {
    rng::Engine engine(rng::derive_seed(seed, messageIndex, "jitter"));
    jitter = static_cast<Tick>(rng::uniform_int(engine, static_cast<std::uint64_t>(link.jitterTicks)));
  }
  return link.baseLatencyTicks + transfer + jitter;
}

std::uint64_t payload_size(std::size_t dim) { return 8 * (dim + 1) + 8; }
std::uint64_t payload_size(const ModelParams& p) { return payload_size(p.dim()); }

void Network::add_link(const LinkSpec& link) {
  validate(link);
  links_[std::minmax(link.from, link.to)] = link;
}

LinkSpec Network::link(const NodeId& a, const NodeId& b) const {
  if (const auto it = links_.find(std::minmax(a, b)); it != links_.end()) return it->second;
  if (defaultLink_) {
    auto l = *defaultLink_;
    l.from = a;
    l.to = b;
    return l;
  }
  fail(ErrorCode::UnresolvedReference, a + "-" + b, "no network link");
}

std::vector<LinkSpec> Network::links() const {
  std::vector<LinkSpec> out;
  for (const auto& [k, l] : links_) out.push_back(l);
  return out;
}

Tick SimClock::send(const NodeId& from, const NodeId& to, std::uint64_t payloadBytes) {
  return simulate_latency(net_->link(from, to), payloadBytes, seed_, nextMessage_++);
}

void to_json(nlohmann::json& j, const LinkSpec& l) {
  j = {{"from", l.from},
       {"to", l.to},
       {"baseLatencyTicks", l.baseLatencyTicks},
       {"jitterTicks", l.jitterTicks},
       {"bytesPerTick", l.bytesPerTick}};
}

void from_json(const nlohmann::json& j, LinkSpec& l) {
  l.from = j.value("from", std::string{});
  l.to = j.value("to", std::string{});
  l.baseLatencyTicks = j.value("baseLatencyTicks", Tick{0});
  l.jitterTicks = j.value("jitterTicks", Tick{0});
  l.bytesPerTick = j.value("bytesPerTick", std::int64_t{1});
  validate(l);
}

}  // namespace ifl
