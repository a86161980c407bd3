#include "ifl/privacy.hpp"

namespace ifl {

namespace {
thread_local ExecutionSide tlsSide = ExecutionSide::Server;
std::atomic<std::uint64_t> violations{0};
}  // namespace

ExecutionSide current_side() noexcept { return tlsSide; }
std::uint64_t privacy_violations() noexcept { return violations.load(); }
void reset_privacy_violations() noexcept { violations.store(0); }

ClientScope::ClientScope() noexcept : previous_(tlsSide) { tlsSide = ExecutionSide::Client; }
ClientScope::~ClientScope() { tlsSide = previous_; }

namespace privacy_detail {
void trip(const ClientId& owner) {
  violations.fetch_add(1);
  fail(ErrorCode::PrivacyViolation, owner, "client data accessed from server context");
}
}  // namespace privacy_detail

}  // namespace ifl
