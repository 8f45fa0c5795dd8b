#pragma once

// Deterministic in-process transport. Messages wait in a queue ordered by
// (round, from_position) and are delivered one at a time to the sender's
// right-hand neighbour.

#include <cstddef>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "ringdh/error.hpp"
#include "ringdh/protocol.hpp"

namespace ringdh {

class Bus {
 public:
  explicit Bus(std::size_t num_parties) : num_parties_(num_parties) {
    if (num_parties < 2) throw Error(Errc::InvalidArgument, "a ring needs at least two endpoints");
  }

  void post(Message msg) {
    if (msg.from_position >= num_parties_) throw Error(Errc::InvalidArgument, "sender outside the ring");
    pending_.push(std::move(msg));
  }

  bool idle() const { return pending_.empty(); }
  std::size_t delivered() const { return delivered_; }
  std::size_t destination(const Message& m) const { return (m.from_position + 1) % num_parties_; }

  Message next() {
    if (pending_.empty()) throw Error(Errc::InvalidArgument, "bus is idle");
    Message m = pending_.top();
    pending_.pop();
    ++delivered_;
    return m;
  }

 private:
  struct Later {
    bool operator()(const Message& a, const Message& b) const {
      return std::tie(a.round, a.from_position) > std::tie(b.round, b.from_position);
    }
  };

  std::size_t num_parties_;
  std::priority_queue<Message, std::vector<Message>, Later> pending_;
  std::size_t delivered_ = 0;
};

inline Transcript bus_run(const GroupParams& params, const std::vector<BigInt>& secrets,
                          const std::vector<std::size_t>& base_choices, const std::string& session_id = "ceremony") {
  auto parties = make_parties(params, secrets, base_choices);
  const std::size_t n = parties.size();
  Bus bus(n);

  Transcript t;
  t.session_id = session_id;
  t.params = params;
  t.final_keys.assign(n, Element{});
  t.base_choices = base_choices;

  for (auto& party : parties) {
    Step s = initial_message(party, session_id);
    party = std::move(s.state);
    bus.post(std::move(*s.forward));
  }
  while (!bus.idle()) {
    Message m = bus.next();
    auto& receiver = parties[bus.destination(m)];
    Step s = absorb_and_forward(receiver, m);
    receiver = std::move(s.state);
    t.messages.push_back(std::move(m));
    if (s.forward) bus.post(std::move(*s.forward));
    if (s.final_key) t.final_keys[receiver.position] = std::move(*s.final_key);
  }
  return t;
}

}  // namespace ringdh
