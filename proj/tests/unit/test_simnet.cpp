#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ifl/simnet.hpp"

using namespace ifl;

TEST(SimulateLatency, Examples) {
  EXPECT_EQ(simulate_latency(LinkSpec{"a", "b", 5, 0, 1}, 0, 1, 0), 5);
  EXPECT_EQ(simulate_latency(LinkSpec{"a", "b", 0, 0, 8}, 80, 1, 0), 10);
  EXPECT_EQ(simulate_latency(LinkSpec{"a", "b", 0, 0, 8}, 81, 1, 0), 11);
  const LinkSpec jittery{"a", "b", 3, 7, 4};
  for (std::uint64_t m = 0; m < 200; ++m) {
    const auto t = simulate_latency(jittery, 10, 42, m);
    EXPECT_EQ(t, simulate_latency(jittery, 10, 42, m));
    EXPECT_GE(t, 3 + 3);
    EXPECT_LE(t, 3 + 3 + 7);
  }
}

TEST(PayloadSize, Examples) {
  EXPECT_EQ(payload_size(2), 32u);
  EXPECT_EQ(payload_size(1), 24u);
  EXPECT_EQ(payload_size(10), 96u);
  EXPECT_EQ(payload_size(ModelParams{{1, 2}, 0, 0}), 32u);
}

TEST(Network, SymmetricLinksAndDefault) {
  Network net;
  net.add_link(LinkSpec{"b", "a", 4, 0, 2});
  EXPECT_EQ(net.link("a", "b").baseLatencyTicks, 4);
  EXPECT_EQ(net.link("b", "a").baseLatencyTicks, 4);
  EXPECT_EQ(net.links().size(), 1u);
  EXPECT_IFL_ERROR(net.link("a", "c"), ErrorCode::UnresolvedReference);

  Network withDefault(LinkSpec{"*", "*", 9, 0, 1});
  EXPECT_EQ(withDefault.link("x", "y").baseLatencyTicks, 9);
  EXPECT_FALSE(withDefault.has_link("x", "y"));
}

TEST(Network, RejectsInvalidLinks) {
  Network net;
  EXPECT_IFL_ERROR(net.add_link(LinkSpec{"a", "b", -1, 0, 1}), ErrorCode::ValidationFailed);
  EXPECT_IFL_ERROR(net.add_link(LinkSpec{"a", "b", 0, 0, 0}), ErrorCode::ValidationFailed);
}

TEST(SimClock, DeterministicMessageSequence) {
  Network net(LinkSpec{"*", "*", 2, 5, 8});
  SimClock a(net, 7), b(net, 7);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(a.send("c", kServerNode, 32), b.send("c", kServerNode, 32));
  EXPECT_EQ(a.messages_sent(), 50u);
  a.advance_to(100);
  a.advance_to(50);
  EXPECT_EQ(a.now(), 100);
}
