#pragma once

// One ring participant over TCP. A node listens for its left neighbour,
// dials its right neighbour, swaps a session handshake line in each
// direction, then runs the ring protocol with one JSON frame per line.
//
// Handshake order matters: every node sends its hello before waiting on
// anything, so no node blocks on a neighbour that is itself blocked.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <json.hpp>

#include "ringdh/codec.hpp"
#include "ringdh/error.hpp"
#include "ringdh/protocol.hpp"

namespace ringdh {

/// Process exit codes for `node serve`.
enum class NodeExit : int {
  Ok = 0,
  Usage = 2,
  HandshakeMismatch = 3,
  ConnectFailed = 4,
  ProtocolError = 5,
  IoFailure = 6,
  Timeout = 7,
};

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

inline Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) {
    throw Error(Errc::InvalidArgument, "address must be host:port, got '" + std::string(text) + "'");
  }
  unsigned long port = 0;
  for (char c : text.substr(colon + 1)) {
    if (c < '0' || c > '9') throw Error(Errc::InvalidArgument, "bad port in '" + std::string(text) + "'");
    port = port * 10 + static_cast<unsigned long>(c - '0');
    if (port > 65535) throw Error(Errc::InvalidArgument, "port out of range in '" + std::string(text) + "'");
  }
  return {std::string(text.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

struct NodeConfig {
  std::string session;
  std::size_t position = 0;
  std::size_t num_parties = 0;
  Endpoint listen;
  Endpoint peer;
  GroupParams params;
  BigInt secret;
  std::size_t base_index = 0;
  std::filesystem::path out;
  unsigned connect_retries = 10;
  std::chrono::milliseconds retry_delay{200};
  std::chrono::milliseconds io_timeout{10'000};
};

struct NodeResult {
  NodeExit exit = NodeExit::Ok;
  std::string detail;
  std::optional<Element> final_key;
  std::vector<Message> sent;
  std::vector<Message> received;
};

namespace detail {

struct NodeFailure {
  NodeExit exit;
  std::string detail;
};

class LineChannel {
 public:
  LineChannel(boost::asio::io_context& io, boost::asio::ip::tcp::socket socket, std::chrono::milliseconds timeout)
      : io_(io), socket_(std::move(socket)), buffer_(64 * 1024), timeout_(timeout) {}

  void write_line(const std::string& line) {
    boost::system::error_code ec;
    boost::asio::write(socket_, boost::asio::buffer(line), ec);
    if (ec) throw NodeFailure{NodeExit::IoFailure, "write failed: " + ec.message()};
  }

  /// Returns the next line including its trailing '\n'.
  std::string read_line() {
    boost::system::error_code result = boost::asio::error::would_block;
    std::size_t length = 0;
    boost::asio::async_read_until(socket_, buffer_, '\n', [&](const boost::system::error_code& ec, std::size_t n) {
      result = ec;
      length = n;
    });
    io_.restart();
    io_.run_for(timeout_);
    if (result == boost::asio::error::would_block) {
      socket_.cancel();
      io_.restart();
      io_.run();
      throw NodeFailure{NodeExit::Timeout, "no line from peer within timeout"};
    }
    if (result) throw NodeFailure{NodeExit::IoFailure, "read failed: " + result.message()};
    std::string line(boost::asio::buffers_begin(buffer_.data()),
                     boost::asio::buffers_begin(buffer_.data()) + static_cast<std::ptrdiff_t>(length));
    buffer_.consume(length);
    return line;
  }

 private:
  boost::asio::io_context& io_;
  boost::asio::ip::tcp::socket socket_;
  boost::asio::streambuf buffer_;
  std::chrono::milliseconds timeout_;
};

inline std::string hello_line(const std::string& session, std::size_t position) {
  nlohmann::ordered_json j;
  j["hello"] = session;
  j["position"] = position;
  return j.dump() + "\n";
}

inline void check_hello(const std::string& line, const std::string& session, std::size_t expected_position) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("hello") || !j["hello"].is_string() ||
      !j.contains("position") || !j["position"].is_number_unsigned()) {
    throw NodeFailure{NodeExit::HandshakeMismatch, "malformed handshake line"};
  }
  if (j["hello"].get<std::string>() != session) {
    throw NodeFailure{NodeExit::HandshakeMismatch,
                      "peer session '" + j["hello"].get<std::string>() + "' != '" + session + "'"};
  }
  if (j["position"].get<std::size_t>() != expected_position) {
    throw NodeFailure{NodeExit::HandshakeMismatch, "peer reports position " +
                                                       std::to_string(j["position"].get<std::size_t>()) +
                                                       ", expected " + std::to_string(expected_position)};
  }
}

inline boost::asio::ip::tcp::endpoint resolve(boost::asio::io_context& io, const Endpoint& ep) {
  boost::asio::ip::tcp::resolver resolver(io);
  boost::system::error_code ec;
  auto results = resolver.resolve(ep.host, std::to_string(ep.port), ec);
  if (ec || results.empty()) throw NodeFailure{NodeExit::ConnectFailed, "cannot resolve " + ep.host};
  return *results.begin();
}

}  // namespace detail

inline nlohmann::json node_fragment_json(const NodeConfig& config, const NodeResult& result) {
  nlohmann::json sent = nlohmann::json::array(), received = nlohmann::json::array();
  for (const auto& m : result.sent) sent.push_back(message_to_json(m));
  for (const auto& m : result.received) received.push_back(message_to_json(m));
  return nlohmann::json{{"version", kTranscriptVersion},
                        {"session", config.session},
                        {"position", config.position},
                        {"num_parties", config.num_parties},
                        {"params", params_to_json(config.params)},
                        {"final_key", result.final_key ? to_hex(*result.final_key) : std::string()},
                        {"sent", std::move(sent)},
                        {"received", std::move(received)}};
}

/// Runs one node to completion. On success the fragment is written to
/// config.out (when non-empty).
inline NodeResult node_serve(const NodeConfig& config) {
  namespace asio = boost::asio;
  using asio::ip::tcp;
  NodeResult result;

  try {
    auto params = std::make_shared<const GroupParams>(config.params);
    PartyState party;
    try {
      party = new_party(config.position, config.num_parties, config.secret, config.base_index, params);
    } catch (const Error& e) {
      throw detail::NodeFailure{NodeExit::Usage, e.what()};
    }

    asio::io_context io;
    tcp::acceptor acceptor(io);
    {
      boost::system::error_code ec;
      const auto local = detail::resolve(io, config.listen);
      acceptor.open(local.protocol(), ec);
      if (!ec) acceptor.set_option(tcp::acceptor::reuse_address(true), ec);
      if (!ec) acceptor.bind(local, ec);
      if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
      if (ec) throw detail::NodeFailure{NodeExit::ConnectFailed, "cannot listen: " + ec.message()};
    }

    // Dial the right-hand neighbour, tolerating any start order.
    tcp::socket right_socket(io);
    {
      const auto remote = detail::resolve(io, config.peer);
      boost::system::error_code ec;
      for (unsigned attempt = 0; attempt <= config.connect_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(config.retry_delay);
        right_socket = tcp::socket(io);
        right_socket.connect(remote, ec);
        if (!ec) break;
      }
      if (ec) {
        throw detail::NodeFailure{NodeExit::ConnectFailed, "cannot reach peer after " +
                                                               std::to_string(config.connect_retries) +
                                                               " retries: " + ec.message()};
      }
    }
    detail::LineChannel right(io, std::move(right_socket), config.io_timeout);
    right.write_line(detail::hello_line(config.session, config.position));

    tcp::socket left_socket(io);
    {
      boost::system::error_code result_ec = asio::error::would_block;
      acceptor.async_accept(left_socket, [&](const boost::system::error_code& ec) { result_ec = ec; });
      io.restart();
      io.run_for(config.io_timeout);
      if (result_ec == asio::error::would_block) {
        acceptor.cancel();
        io.restart();
        io.run();
        throw detail::NodeFailure{NodeExit::Timeout, "left neighbour never connected"};
      }
      if (result_ec) throw detail::NodeFailure{NodeExit::IoFailure, "accept failed: " + result_ec.message()};
    }
    detail::LineChannel left(io, std::move(left_socket), config.io_timeout);

    const std::string left_hello = left.read_line();
    left.write_line(detail::hello_line(config.session, config.position));
    detail::check_hello(left_hello, config.session, party.left());
    detail::check_hello(right.read_line(), config.session, party.right());

    Step step = initial_message(party, config.session);
    party = std::move(step.state);
    right.write_line(encode(*step.forward));
    result.sent.push_back(std::move(*step.forward));

    while (!party.finished()) {
      const std::string line = left.read_line();
      Message msg;
      try {
        msg = decode(line, config.params.p);
      } catch (const Error& e) {
        throw detail::NodeFailure{NodeExit::ProtocolError, e.what()};
      }
      if (msg.session_id != config.session) {
        throw detail::NodeFailure{NodeExit::ProtocolError, "frame for foreign session '" + msg.session_id + "'"};
      }
      try {
        step = absorb_and_forward(party, msg);
      } catch (const Error& e) {
        throw detail::NodeFailure{NodeExit::ProtocolError, e.what()};
      }
      party = std::move(step.state);
      result.received.push_back(std::move(msg));
      if (step.forward) {
        right.write_line(encode(*step.forward));
        result.sent.push_back(std::move(*step.forward));
      }
      if (step.final_key) result.final_key = std::move(step.final_key);
    }

    if (!config.out.empty()) {
      try {
        write_text_file(config.out, node_fragment_json(config, result).dump(2) + "\n");
      } catch (const Error& e) {
        throw detail::NodeFailure{NodeExit::IoFailure, e.what()};
      }
    }
  } catch (const detail::NodeFailure& f) {
    result.exit = f.exit;
    result.detail = f.detail;
  }
  return result;
}

/// Loopback port that was free a moment ago; for tests and demos.
inline std::uint16_t free_loopback_port() {
  boost::asio::io_context io;
  boost::asio::ip::tcp::acceptor a(io, {boost::asio::ip::make_address("127.0.0.1"), 0});
  return a.local_endpoint().port();
}

}  // namespace ringdh
