#pragma once

// JSON encodings: group parameters, wire frames (one line per message),
// transcripts and verification claims. Integers that may exceed 64 bits
// travel as strings: decimal in parameter and claim files, canonical hex in
// frames and transcripts.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ringdh/error.hpp"
#include "ringdh/modmath.hpp"
#include "ringdh/protocol.hpp"
#include "ringdh/recurrence.hpp"

namespace ringdh {

using nlohmann::json;

inline constexpr int kTranscriptVersion = 1;

namespace detail {

[[noreturn]] inline void schema_error(const std::string& where, const std::string& what) {
  throw Error(Errc::SchemaViolation, (where.empty() ? std::string("/") : where) + ": " + what);
}

inline const json& member(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where + "/" + key, "missing");
  return *it;
}

inline BigInt decimal_at(const json& j, const std::string& where) {
  if (!j.is_string()) schema_error(where, "expected a decimal string");
  try {
    return parse_decimal(j.get<std::string>());
  } catch (const Error& e) {
    schema_error(where, e.what());
  }
}

inline BigInt hex_at(const json& j, const std::string& where) {
  if (!j.is_string()) schema_error(where, "expected a hex string");
  auto v = parse_hex_canonical(j.get<std::string>());
  if (!v) schema_error(where, "not canonical lowercase hex");
  return *v;
}

inline std::uint64_t uint_at(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    schema_error(where, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

inline std::string string_at(const json& j, const std::string& where) {
  if (!j.is_string()) schema_error(where, "expected a string");
  return j.get<std::string>();
}

inline const json& array_at(const json& j, const std::string& where) {
  if (!j.is_array()) schema_error(where, "expected an array");
  return j;
}

inline void only_keys(const json& obj, std::initializer_list<std::string_view> keys, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (auto k : keys) known = known || it.key() == k;
    if (!known) schema_error(where + "/" + it.key(), "unknown field");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Group parameters: {"p": "<dec>", "bases": ["<dec>", ...], "min_order": n}

inline json params_to_json(const GroupParams& params) {
  json bases = json::array();
  for (const auto& b : params.bases) bases.push_back(to_decimal(b));
  return json{{"p", to_decimal(params.p)}, {"bases", std::move(bases)}, {"min_order", params.min_order}};
}

inline GroupParams params_from_json(const json& j, const std::string& where = "") {
  GroupParams out;
  out.p = detail::decimal_at(detail::member(j, "p", where), where + "/p");
  const auto& bases = detail::array_at(detail::member(j, "bases", where), where + "/bases");
  for (std::size_t i = 0; i < bases.size(); ++i) {
    out.bases.push_back(detail::decimal_at(bases[i], where + "/bases/" + std::to_string(i)));
  }
  out.min_order = detail::uint_at(detail::member(j, "min_order", where), where + "/min_order");
  return out;
}

// ---------------------------------------------------------------------------
// Wire frames

/// {"session":..,"round":..,"from":..,"value":"<hex>"} followed by '\n'.
inline std::string encode(const Message& msg) {
  nlohmann::ordered_json j;
  j["session"] = msg.session_id;
  j["round"] = msg.round;
  j["from"] = msg.from_position;
  j["value"] = to_hex(msg.value);
  return j.dump() + "\n";
}

/// Accepts exactly the bytes `encode` would produce for some message, then
/// checks the value against the session modulus.
inline Message decode(std::string_view frame, const BigInt& p) {
  if (frame.empty() || frame.back() != '\n') throw Error(Errc::MalformedFrame, "frame must end in a line feed");
  const std::string_view body = frame.substr(0, frame.size() - 1);
  if (body.find('\n') != std::string_view::npos) throw Error(Errc::MalformedFrame, "embedded line feed");

  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::MalformedFrame, "not a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k != "session" && k != "round" && k != "from" && k != "value") {
      throw Error(Errc::UnknownField, "unexpected field '" + k + "'");
    }
  }
  auto need = [&](const char* key) -> const json& {
    auto it = j.find(key);
    if (it == j.end()) throw Error(Errc::MalformedFrame, std::string("missing field '") + key + "'");
    return *it;
  };
  const auto& session = need("session");
  const auto& round = need("round");
  const auto& from = need("from");
  const auto& value = need("value");
  if (!session.is_string()) throw Error(Errc::MalformedFrame, "session must be a string");
  if (!round.is_number_unsigned() || round.get<std::uint64_t>() < 1) {
    throw Error(Errc::MalformedFrame, "round must be a positive integer");
  }
  if (!from.is_number_unsigned()) throw Error(Errc::MalformedFrame, "from must be a non-negative integer");
  if (!value.is_string()) throw Error(Errc::MalformedFrame, "value must be a hex string");
  auto v = parse_hex_canonical(value.get<std::string>());
  if (!v) throw Error(Errc::MalformedFrame, "value is not canonical lowercase hex");

  Message msg{session.get<std::string>(), round.get<std::size_t>(), from.get<std::size_t>(), *v};
  if (encode(msg) != frame) throw Error(Errc::MalformedFrame, "frame is not in canonical form");
  if (msg.value >= p) throw Error(Errc::ValueOutOfRange, "value not below p");
  return msg;
}

// ---------------------------------------------------------------------------
// Transcripts

inline json message_to_json(const Message& m) {
  return json{{"session", m.session_id}, {"round", m.round}, {"from", m.from_position}, {"value", to_hex(m.value)}};
}

inline Message message_from_json(const json& j, const BigInt& p, const std::string& where) {
  detail::only_keys(j, {"session", "round", "from", "value"}, where);
  Message m;
  m.session_id = detail::string_at(detail::member(j, "session", where), where + "/session");
  m.round = detail::uint_at(detail::member(j, "round", where), where + "/round");
  m.from_position = detail::uint_at(detail::member(j, "from", where), where + "/from");
  m.value = detail::hex_at(detail::member(j, "value", where), where + "/value");
  if (m.value >= p) detail::schema_error(where + "/value", "value not below p");
  if (m.round < 1) detail::schema_error(where + "/round", "round must be at least 1");
  return m;
}

inline json transcript_to_json(const Transcript& t) {
  json frames = json::array();
  for (const auto& m : t.messages) frames.push_back(message_to_json(m));
  json keys = json::array();
  for (const auto& k : t.final_keys) keys.push_back(to_hex(k));
  return json{{"version", kTranscriptVersion},
              {"session", t.session_id},
              {"params", params_to_json(t.params)},
              {"frames", std::move(frames)},
              {"final_keys", std::move(keys)},
              {"private", {{"base_choices", t.base_choices}}}};
}

/// Parses and checks every structural invariant: version, value ranges,
/// N(N-1) frames, strictly increasing round per circulating value.
inline Transcript transcript_from_json(const json& j) {
  if (!j.is_object()) detail::schema_error("", "expected an object");
  detail::only_keys(j, {"version", "session", "params", "frames", "final_keys", "private"}, "");
  if (detail::uint_at(detail::member(j, "version", ""), "/version") != kTranscriptVersion) {
    detail::schema_error("/version", "unsupported version");
  }
  Transcript t;
  t.session_id = detail::string_at(detail::member(j, "session", ""), "/session");
  t.params = params_from_json(detail::member(j, "params", ""), "/params");

  const auto& keys = detail::array_at(detail::member(j, "final_keys", ""), "/final_keys");
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const std::string where = "/final_keys/" + std::to_string(i);
    t.final_keys.push_back(detail::hex_at(keys[i], where));
    if (t.final_keys.back() >= t.params.p) detail::schema_error(where, "value not below p");
  }
  const std::size_t n = t.final_keys.size();
  if (n < 2) detail::schema_error("/final_keys", "need at least two parties");

  const auto& priv = detail::member(j, "private", "");
  detail::only_keys(priv, {"base_choices"}, "/private");
  const auto& choices = detail::array_at(detail::member(priv, "base_choices", "/private"), "/private/base_choices");
  if (choices.size() != n) detail::schema_error("/private/base_choices", "length differs from final_keys");
  for (std::size_t i = 0; i < choices.size(); ++i) {
    const std::string where = "/private/base_choices/" + std::to_string(i);
    t.base_choices.push_back(detail::uint_at(choices[i], where));
    if (t.base_choices.back() >= t.params.bases.size()) detail::schema_error(where, "base index out of range");
  }

  const auto& frames = detail::array_at(detail::member(j, "frames", ""), "/frames");
  if (frames.size() != n * (n - 1)) {
    detail::schema_error("/frames", "expected " + std::to_string(n * (n - 1)) + " frames, found " +
                                        std::to_string(frames.size()));
  }
  // Value starting at party s is carried in round r by party (s + r - 1) mod N.
  std::vector<std::size_t> last_round(n, 0);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string where = "/frames/" + std::to_string(i);
    Message m = message_from_json(frames[i], t.params.p, where);
    if (m.session_id != t.session_id) detail::schema_error(where + "/session", "session mismatch");
    if (m.from_position >= n) detail::schema_error(where + "/from", "position outside the ring");
    if (m.round >= n) detail::schema_error(where + "/round", "round beyond N-1");
    const std::size_t origin = (m.from_position + n - (m.round - 1) % n) % n;
    if (m.round <= last_round[origin]) detail::schema_error(where + "/round", "round does not increase");
    last_round[origin] = m.round;
    t.messages.push_back(std::move(m));
  }
  return t;
}

inline std::string transcript_text(const Transcript& t) { return transcript_to_json(t).dump(2) + "\n"; }

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error(Errc::IoFailure, "write to " + path.string() + " failed");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline json read_json_file(const std::filesystem::path& path) {
  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(Errc::SchemaViolation, path.string() + ": not valid JSON");
  return j;
}

inline void transcript_store(const Transcript& t, const std::filesystem::path& path) {
  write_text_file(path, transcript_text(t));
}

inline Transcript transcript_load(const std::filesystem::path& path) {
  return transcript_from_json(read_json_file(path));
}

inline GroupParams params_load(const std::filesystem::path& path) { return params_from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Verification claims: {"p", "bases", "window", "start_tag"}

inline json claim_to_json(const VerificationClaim& c) {
  json bases = json::array(), window = json::array();
  for (const auto& b : c.bases) bases.push_back(to_decimal(b));
  for (const auto& v : c.window) window.push_back(to_decimal(v));
  return json{{"p", to_decimal(c.p)}, {"bases", std::move(bases)}, {"window", std::move(window)},
              {"start_tag", c.start_tag}};
}

/// Structural parse only; semantic checks (distinct bases, window length,
/// recurrence) belong to verify_claim.
inline VerificationClaim claim_from_json(const json& j) {
  if (!j.is_object()) detail::schema_error("", "expected an object");
  detail::only_keys(j, {"p", "bases", "window", "start_tag"}, "");
  VerificationClaim c;
  c.p = detail::decimal_at(detail::member(j, "p", ""), "/p");
  const auto& bases = detail::array_at(detail::member(j, "bases", ""), "/bases");
  for (std::size_t i = 0; i < bases.size(); ++i) {
    c.bases.push_back(detail::decimal_at(bases[i], "/bases/" + std::to_string(i)));
  }
  const auto& window = detail::array_at(detail::member(j, "window", ""), "/window");
  for (std::size_t i = 0; i < window.size(); ++i) {
    c.window.push_back(detail::decimal_at(window[i], "/window/" + std::to_string(i)));
  }
  c.start_tag = detail::string_at(detail::member(j, "start_tag", ""), "/start_tag");
  return c;
}

}  // namespace ringdh
