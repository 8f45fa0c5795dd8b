#pragma once

// N-party ring key agreement. Each party emits its chosen base raised to its
// secret to the right-hand neighbour; every received value is raised to the
// receiver's secret and passed on. After N-1 hops a value has absorbed all N
// secrets and the party holding it keeps it as its final key, so party i ends
// with bases[choice of party i+1] ^ (product of secrets).

#include <algorithm>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ringdh/error.hpp"
#include "ringdh/modmath.hpp"

namespace ringdh {

struct PartyState {
  std::size_t position = 0;
  std::size_t num_parties = 0;
  BigInt secret;
  std::size_t base_index = 0;
  std::optional<Element> held;
  std::size_t round = 0;
  std::shared_ptr<const GroupParams> params;

  std::size_t right() const { return (position + 1) % num_parties; }
  std::size_t left() const { return (position + num_parties - 1) % num_parties; }
  bool finished() const { return round == num_parties; }
};

/// One hop on the ring. The sender's base pick is deliberately absent.
struct Message {
  std::string session_id;
  std::size_t round = 0;
  std::size_t from_position = 0;
  Element value;

  friend bool operator==(const Message&, const Message&) = default;
};

struct Transcript {
  std::string session_id;
  GroupParams params;
  std::vector<Message> messages;
  std::vector<Element> final_keys;
  /// Audit-only record of each party's pick; never sent on the wire.
  std::vector<std::size_t> base_choices;

  std::size_t num_parties() const { return final_keys.size(); }

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

/// Result of a pure state transition: the successor state plus either a
/// message to forward or the retained final key.
struct Step {
  PartyState state;
  std::optional<Message> forward;
  std::optional<Element> final_key;
};

inline PartyState new_party(std::size_t position, std::size_t num_parties, BigInt secret, std::size_t base_index,
                            std::shared_ptr<const GroupParams> params) {
  if (!params) throw Error(Errc::InvalidArgument, "party needs group parameters");
  if (num_parties < 2) throw Error(Errc::InvalidArgument, "a ring needs at least two parties");
  if (position >= num_parties) throw Error(Errc::InvalidArgument, "position outside the ring");
  if (secret < 2 || secret > params->p - 2) {
    throw Error(Errc::SecretOutOfRange, "secret must lie in [2, p-2]");
  }
  if (base_index >= params->bases.size()) {
    throw Error(Errc::BadBaseIndex, "base index " + std::to_string(base_index) + " but only " +
                                        std::to_string(params->bases.size()) + " bases");
  }
  PartyState s;
  s.position = position;
  s.num_parties = num_parties;
  s.secret = std::move(secret);
  s.base_index = base_index;
  s.params = std::move(params);
  return s;
}

inline Step initial_message(const PartyState& party, const std::string& session_id) {
  if (party.round != 0) throw Error(Errc::AlreadyStarted, "party " + std::to_string(party.position) + " already emitted");
  const auto& params = *party.params;
  Step step{party, std::nullopt, std::nullopt};
  step.state.round = 1;
  step.forward = Message{session_id, 1, party.position, mod_pow(params.bases[party.base_index], party.secret, params.p)};
  return step;
}

inline Step absorb_and_forward(const PartyState& party, const Message& msg) {
  if (msg.from_position != party.left()) {
    throw Error(Errc::WrongSender, "party " + std::to_string(party.position) + " expects messages from " +
                                       std::to_string(party.left()) + ", got " + std::to_string(msg.from_position));
  }
  if (party.round == 0 || party.finished() || msg.round != party.round) {
    throw Error(Errc::RoundMismatch, "party " + std::to_string(party.position) + " at round " +
                                         std::to_string(party.round) + " got round " + std::to_string(msg.round));
  }
  const auto& p = party.params->p;
  if (msg.value < 0 || msg.value >= p) throw Error(Errc::ValueOutOfRange, "message value outside [0, p)");

  Step step{party, std::nullopt, std::nullopt};
  step.state.held = mod_pow(msg.value, party.secret, p);
  if (msg.round + 1 < party.num_parties) {
    step.state.round = msg.round + 1;
    step.forward = Message{msg.session_id, msg.round + 1, party.position, *step.state.held};
  } else {
    step.state.round = party.num_parties;
    step.final_key = step.state.held;
  }
  return step;
}

/// Thread-safe append-only message log.
class TranscriptAccumulator {
 public:
  void append(Message msg) {
    std::lock_guard lock(mu_);
    messages_.push_back(std::move(msg));
  }

  std::vector<Message> snapshot() const {
    std::lock_guard lock(mu_);
    return messages_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<Message> messages_;
};

/// Drives already-constructed parties to completion, round by round and in
/// position order within a round.
inline Transcript run_parties(const std::vector<PartyState>& parties, const std::string& session_id) {
  const std::size_t n = parties.size();
  if (n < 2) throw Error(Errc::InvalidArgument, "a ceremony needs at least two parties");

  std::vector<std::optional<PartyState>> ring(n);
  for (const auto& p : parties) {
    if (p.num_parties != n || p.position >= n) throw Error(Errc::InvalidArgument, "party ring size mismatch");
    if (ring[p.position]) throw Error(Errc::DuplicatePosition, "position " + std::to_string(p.position) + " taken twice");
    ring[p.position] = p;
  }

  Transcript t;
  t.session_id = session_id;
  t.params = *parties.front().params;
  t.final_keys.assign(n, Element{});
  t.base_choices.resize(n);

  std::vector<Message> in_flight;
  for (std::size_t i = 0; i < n; ++i) {
    t.base_choices[i] = ring[i]->base_index;
    Step s = initial_message(*ring[i], session_id);
    ring[i] = std::move(s.state);
    in_flight.push_back(std::move(*s.forward));
  }
  while (!in_flight.empty()) {
    std::vector<Message> next;
    for (auto& msg : in_flight) {
      const std::size_t to = (msg.from_position + 1) % n;
      Step s = absorb_and_forward(*ring[to], msg);
      ring[to] = std::move(s.state);
      t.messages.push_back(std::move(msg));
      if (s.forward) next.push_back(std::move(*s.forward));
      if (s.final_key) t.final_keys[to] = std::move(*s.final_key);
    }
    // Keep each round ordered by sender, matching the bus's delivery order.
    std::sort(next.begin(), next.end(),
              [](const Message& a, const Message& b) { return a.from_position < b.from_position; });
    in_flight = std::move(next);
  }
  return t;
}

inline std::vector<PartyState> make_parties(const GroupParams& params, const std::vector<BigInt>& secrets,
                                            const std::vector<std::size_t>& base_choices) {
  if (secrets.size() != base_choices.size()) {
    throw Error(Errc::InvalidArgument, "secrets and base choices differ in length");
  }
  const std::size_t n = secrets.size();
  if (n < 2) throw Error(Errc::InvalidArgument, "a ceremony needs at least two parties");
  auto shared = std::make_shared<const GroupParams>(params);
  std::vector<PartyState> parties;
  parties.reserve(n);
  for (std::size_t i = 0; i < n; ++i) parties.push_back(new_party(i, n, secrets[i], base_choices[i], shared));
  return parties;
}

inline Transcript run_ceremony(const GroupParams& params, const std::vector<BigInt>& secrets,
                               const std::vector<std::size_t>& base_choices,
                               const std::string& session_id = "ceremony") {
  return run_parties(make_parties(params, secrets, base_choices), session_id);
}

/// Uniform secret in [2, p-2].
template <class Rng>
BigInt random_secret(const GroupParams& params, Rng& rng) {
  if (params.p < 5) throw Error(Errc::InvalidArgument, "p too small to draw a secret");
  return random_in_range(BigInt(2), params.p - 2, rng);
}

}  // namespace ringdh
