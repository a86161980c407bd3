#pragma once

// Client/server privacy boundary.
//
// Compile time: everything a client sends to the server travels through a
// Channel<M>, and M must be a WireMessage: a type that lists its fields via
// fields() and none of whose fields (recursively through containers) is a
// Dataset, a Sample or a ClientPrivate<T>.
//
// Run time: raw data lives in ClientPrivate<T>. Reading it outside a
// ClientScope (i.e. from server context) counts a violation and throws
// PrivacyViolation.

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <type_traits>
#include <utility>
#include <vector>

#include "ifl/domain.hpp"
#include "ifl/error.hpp"

namespace ifl {

template <typename T>
class ClientPrivate;

namespace privacy_detail {

template <typename T>
struct carries_samples : std::false_type {};

template <typename T>
inline constexpr bool carries_samples_v = carries_samples<std::remove_cvref_t<T>>::value;

template <>
struct carries_samples<Dataset> : std::true_type {};
template <>
struct carries_samples<Sample> : std::true_type {};
template <typename T>
struct carries_samples<ClientPrivate<T>> : std::true_type {};
template <typename T, typename A>
struct carries_samples<std::vector<T, A>> : std::bool_constant<carries_samples_v<T>> {};
template <typename T>
struct carries_samples<std::optional<T>> : std::bool_constant<carries_samples_v<T>> {};
template <typename K, typename C, typename A>
struct carries_samples<std::set<K, C, A>> : std::bool_constant<carries_samples_v<K>> {};
template <typename K, typename V, typename C, typename A>
struct carries_samples<std::map<K, V, C, A>> : std::bool_constant<carries_samples_v<K> || carries_samples_v<V>> {};
template <typename A, typename B>
struct carries_samples<std::pair<A, B>> : std::bool_constant<carries_samples_v<A> || carries_samples_v<B>> {};

template <typename Tuple>
struct any_field_carries;
template <typename... Fs>
struct any_field_carries<std::tuple<Fs...>> : std::bool_constant<(carries_samples_v<Fs> || ...)> {};

}  // namespace privacy_detail

template <typename T>
concept WireMessage = requires(const T& m) {
  { m.fields() };
} && !privacy_detail::carries_samples_v<T> &&
    !privacy_detail::any_field_carries<decltype(std::declval<const T&>().fields())>::value;

enum class ExecutionSide { Server, Client };

ExecutionSide current_side() noexcept;
std::uint64_t privacy_violations() noexcept;
void reset_privacy_violations() noexcept;

// Marks the current thread as executing client-side code.
class ClientScope {
 public:
  ClientScope() noexcept;
  ~ClientScope();
  ClientScope(const ClientScope&) = delete;
  ClientScope& operator=(const ClientScope&) = delete;

 private:
  ExecutionSide previous_;
};

namespace privacy_detail {
[[noreturn]] void trip(const ClientId& owner);
}

template <typename T>
class ClientPrivate {
 public:
  ClientPrivate(ClientId owner, T value) : owner_(std::move(owner)), value_(std::move(value)) {}

  const T& get() const {
    if (current_side() != ExecutionSide::Client) privacy_detail::trip(owner_);
    return value_;
  }
  T& get_mut() {
    if (current_side() != ExecutionSide::Client) privacy_detail::trip(owner_);
    return value_;
  }
  const ClientId& owner() const noexcept { return owner_; }

 private:
  ClientId owner_;
  T value_;
};

// Client -> server transport. Only wire messages may be instantiated.
template <WireMessage M>
class Channel {
 public:
  void send(M message) { inbox_.push_back(std::move(message)); }
  std::vector<M> drain() { return std::exchange(inbox_, {}); }
  std::size_t pending() const { return inbox_.size(); }

 private:
  std::vector<M> inbox_;
};

}  // namespace ifl
