#include <future>
#include <thread>

#include <gtest/gtest.h>

#include "ringdh/bus.hpp"
#include "ringdh/codec.hpp"
#include "ringdh/node.hpp"
#include "ringdh/outcome.hpp"

using namespace ringdh;

namespace {

std::vector<NodeConfig> ring_configs(const GroupParams& params, const std::vector<BigInt>& secrets,
                                     const Choices& choices, const std::string& session) {
  const std::size_t n = secrets.size();
  std::vector<std::uint16_t> ports;
  for (std::size_t i = 0; i < n; ++i) ports.push_back(free_loopback_port());
  std::vector<NodeConfig> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].session = session;
    out[i].position = i;
    out[i].num_parties = n;
    out[i].listen = {"127.0.0.1", ports[i]};
    out[i].peer = {"127.0.0.1", ports[(i + 1) % n]};
    out[i].params = params;
    out[i].secret = secrets[i];
    out[i].base_index = choices[i];
    out[i].io_timeout = std::chrono::milliseconds(3000);
  }
  return out;
}

std::vector<NodeResult> run_ring(const std::vector<NodeConfig>& configs) {
  std::vector<std::future<NodeResult>> futures;
  for (const auto& c : configs) futures.push_back(std::async(std::launch::async, [c] { return node_serve(c); }));
  std::vector<NodeResult> out;
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

}  // namespace

TEST(Bus, DeliversRoundMajorPositionMinor) {
  Bus bus(3);
  bus.post(Message{"s", 2, 0, 1});
  bus.post(Message{"s", 1, 2, 1});
  bus.post(Message{"s", 1, 0, 1});
  bus.post(Message{"s", 2, 1, 1});
  std::vector<std::pair<std::size_t, std::size_t>> order;
  while (!bus.idle()) {
    auto m = bus.next();
    order.emplace_back(m.round, m.from_position);
  }
  EXPECT_EQ(order, (std::vector<std::pair<std::size_t, std::size_t>>{{1, 0}, {1, 2}, {2, 0}, {2, 1}}));
  EXPECT_EQ(bus.delivered(), 4u);
  EXPECT_THROW(bus.next(), Error);
}

TEST(BusRun, MatchesRunCeremony) {
  const GroupParams params{23, {5, 7}, 1};
  EXPECT_EQ(transcript_text(bus_run(params, {3, 4, 6}, {0, 0, 0})),
            transcript_text(run_ceremony(params, {3, 4, 6}, {0, 0, 0})));
  const GroupParams big{1019, {2, 3, 5}, 1};
  EXPECT_EQ(bus_run(big, {5, 7, 11, 13, 17}, {0, 2, 1, 0, 2}), run_ceremony(big, {5, 7, 11, 13, 17}, {0, 2, 1, 0, 2}));
}

TEST(BusRun, AdjacentPairsCase) {
  // (u, u, w, w): final keys u, w, w, u, so A and D share, B and C share.
  const GroupParams params{1019, {2, 3}, 1};
  auto t = bus_run(params, {5, 7, 11, 13}, {0, 0, 1, 1});
  EXPECT_EQ(partition_by_equality(t.final_keys), sharing_pattern({0, 0, 1, 1}).classes);
  EXPECT_EQ(partition_by_equality(t.final_keys), (std::vector<std::vector<std::size_t>>{{0, 3}, {1, 2}}));
}

TEST(BusRun, TwoPartyRing) {
  const GroupParams params{23, {5, 7}, 1};
  auto t = bus_run(params, {3, 4}, {0, 0});
  EXPECT_EQ(t.final_keys[0], mod_pow(5, 12, 23));
  EXPECT_EQ(t.final_keys[1], mod_pow(5, 12, 23));
  EXPECT_EQ(t.messages.size(), 2u);
}

TEST(Endpoint, Parsing) {
  auto e = parse_endpoint("127.0.0.1:9000");
  EXPECT_EQ(e.host, "127.0.0.1");
  EXPECT_EQ(e.port, 9000);
  EXPECT_THROW(parse_endpoint("nope"), Error);
  EXPECT_THROW(parse_endpoint("h:70000"), Error);
}

TEST(Tcp, ThreeNodesAgreeWithBus) {
  const GroupParams params{23, {5, 7}, 1};
  const std::vector<BigInt> secrets{3, 4, 6};
  const Choices choices{0, 0, 1};
  const auto results = run_ring(ring_configs(params, secrets, choices, "tcp-1"));
  const auto bus = bus_run(params, secrets, choices, "tcp-1");
  for (std::size_t i = 0; i < 3; ++i) {
    ASSERT_EQ(results[i].exit, NodeExit::Ok) << results[i].detail;
    EXPECT_EQ(*results[i].final_key, bus.final_keys[i]);
  }
  std::vector<Message> sent;
  for (const auto& r : results) sent.insert(sent.end(), r.sent.begin(), r.sent.end());
  std::sort(sent.begin(), sent.end(),
            [](const Message& a, const Message& b) { return std::tie(a.round, a.from_position) < std::tie(b.round, b.from_position); });
  EXPECT_EQ(sent, bus.messages);
}

TEST(Tcp, SingleBaseAllEqual) {
  const GroupParams params{1019, {2, 3}, 1};
  const auto results = run_ring(ring_configs(params, {5, 7, 11}, {0, 0, 0}, "tcp-2"));
  for (const auto& r : results) {
    ASSERT_EQ(r.exit, NodeExit::Ok) << r.detail;
    EXPECT_EQ(*r.final_key, *results[0].final_key);
  }
}

TEST(Tcp, SessionMismatchIsReported) {
  const GroupParams params{1019, {2, 3}, 1};
  auto configs = ring_configs(params, {5, 7, 11}, {0, 0, 0}, "tcp-3");
  configs[1].session = "someone-else";
  const auto results = run_ring(configs);
  EXPECT_EQ(results[1].exit, NodeExit::HandshakeMismatch) << results[1].detail;
  EXPECT_EQ(results[0].exit, NodeExit::HandshakeMismatch) << results[0].detail;
  EXPECT_EQ(results[2].exit, NodeExit::HandshakeMismatch) << results[2].detail;
}

TEST(Tcp, ConnectFailureAfterRetries) {
  NodeConfig c;
  c.session = "lonely";
  c.position = 0;
  c.num_parties = 2;
  c.listen = {"127.0.0.1", free_loopback_port()};
  c.peer = {"127.0.0.1", free_loopback_port()};
  c.params = GroupParams{23, {5}, 1};
  c.secret = 3;
  c.connect_retries = 2;
  c.retry_delay = std::chrono::milliseconds(10);
  const auto r = node_serve(c);
  EXPECT_EQ(r.exit, NodeExit::ConnectFailed);
}

TEST(Tcp, InvalidPartyIsUsageError) {
  NodeConfig c;
  c.session = "bad";
  c.num_parties = 2;
  c.params = GroupParams{23, {5}, 1};
  c.secret = 1;
  EXPECT_EQ(node_serve(c).exit, NodeExit::Usage);
}

TEST(Tcp, FragmentFileWritten) {
  const GroupParams params{23, {5, 7}, 1};
  auto configs = ring_configs(params, {3, 4}, {0, 1}, "tcp-4");
  const auto dir = std::filesystem::temp_directory_path();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    configs[i].out = dir / ("ringdh_frag_" + std::to_string(::getpid()) + "_" + std::to_string(i) + ".json");
  }
  const auto results = run_ring(configs);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    ASSERT_EQ(results[i].exit, NodeExit::Ok) << results[i].detail;
    auto j = read_json_file(configs[i].out);
    EXPECT_EQ(j["final_key"], to_hex(*results[i].final_key));
    EXPECT_EQ(j["session"], "tcp-4");
    EXPECT_EQ(j["sent"].size(), 1u);
    EXPECT_EQ(j["received"].size(), 1u);
    std::filesystem::remove(configs[i].out);
  }
}
