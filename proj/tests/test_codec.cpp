#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "ringdh/bus.hpp"
#include "ringdh/codec.hpp"

using namespace ringdh;

namespace {

template <class F>
Errc error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an ringdh::Error";
  return Errc::InvalidArgument;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ringdh_test_" + std::to_string(::getpid()) + "_" + name);
}

Transcript sample_transcript() {
  return bus_run(GroupParams{1019, {2, 3, 5}, 1}, {5, 7, 11, 13}, {0, 2, 1, 0}, "sess-1");
}

}  // namespace

TEST(Frame, ExactBytes) {
  EXPECT_EQ(encode(Message{"s", 1, 0, 0}), "{\"session\":\"s\",\"round\":1,\"from\":0,\"value\":\"0\"}\n");
  EXPECT_EQ(encode(Message{"s", 2, 3, 255}), "{\"session\":\"s\",\"round\":2,\"from\":3,\"value\":\"ff\"}\n");
}

TEST(Frame, DecodeErrors) {
  const BigInt p = 1019;
  EXPECT_EQ(decode("{\"session\":\"s\",\"round\":1,\"from\":0,\"value\":\"ff\"}\n", p), (Message{"s", 1, 0, 255}));
  EXPECT_EQ(error_code_of([&] { decode("{\"session\":\"s\",\"round\":1,\"from\":0,\"value\":\"ff\"}", p); }),
            Errc::MalformedFrame);
  EXPECT_EQ(error_code_of([&] { decode("not json\n", p); }), Errc::MalformedFrame);
  EXPECT_EQ(error_code_of([&] { decode("{\"session\":\"s\",\"round\":1,\"from\":0,\"value\":\"ff\",\"base\":1}\n", p); }),
            Errc::UnknownField);
  EXPECT_EQ(error_code_of([&] { decode("{\"session\":\"s\",\"round\":1,\"from\":0,\"value\":\"3fb\"}\n", p); }),
            Errc::ValueOutOfRange);
  EXPECT_EQ(error_code_of([&] { decode("{\"session\":\"s\",\"round\":1,\"from\":0,\"value\":\"0ff\"}\n", p); }),
            Errc::MalformedFrame);
  EXPECT_EQ(error_code_of([&] { decode("{\"round\":1,\"session\":\"s\",\"from\":0,\"value\":\"ff\"}\n", p); }),
            Errc::MalformedFrame);
  EXPECT_EQ(error_code_of([&] { decode("{\"session\":\"s\",\"round\":0,\"from\":0,\"value\":\"ff\"}\n", p); }),
            Errc::MalformedFrame);
  EXPECT_EQ(error_code_of([&] { decode("{\"session\":\"s\",\"round\":1,\"from\":-1,\"value\":\"ff\"}\n", p); }),
            Errc::MalformedFrame);
}

TEST(Frame, RandomRoundTrip) {
  std::mt19937_64 rng(51);
  const BigInt p = (BigInt(1) << 127) - 1;
  for (int i = 0; i < 2000; ++i) {
    std::string session;
    for (int c = 0, len = static_cast<int>(rng() % 12); c < len; ++c) session.push_back(static_cast<char>(32 + rng() % 95));
    const Message m{session, 1 + rng() % 100, rng() % 100, random_below(p, rng)};
    EXPECT_EQ(decode(encode(m), p), m);
  }
}

TEST(Transcript, StoreLoadRoundTrip) {
  const auto t = sample_transcript();
  const auto path = temp_path("roundtrip.json");
  transcript_store(t, path);
  EXPECT_EQ(transcript_load(path), t);
  std::filesystem::remove(path);
}

TEST(Transcript, SecretsNeverPersisted) {
  const auto text = transcript_text(sample_transcript());
  EXPECT_EQ(text.find("secret"), std::string::npos);
  auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j["version"], 1);
  EXPECT_TRUE(j["private"].contains("base_choices"));
}

TEST(Transcript, SchemaViolations) {
  auto j = transcript_to_json(sample_transcript());
  auto expect_violation = [](const nlohmann::json& doc, const std::string& where) {
    try {
      transcript_from_json(doc);
      ADD_FAILURE() << "expected SchemaViolation at " << where;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::SchemaViolation);
      EXPECT_NE(std::string(e.what()).find(where), std::string::npos) << e.what();
    }
  };

  auto short_frames = j;
  short_frames["frames"].erase(short_frames["frames"].size() - 1);
  expect_violation(short_frames, "/frames");

  auto big_value = j;
  big_value["frames"][3]["value"] = to_hex(1019);
  expect_violation(big_value, "/frames/3/value");

  auto bad_version = j;
  bad_version["version"] = 2;
  expect_violation(bad_version, "/version");

  auto extra = j;
  extra["frames"][0]["base"] = 1;
  expect_violation(extra, "/frames/0/base");

  auto reordered = j;
  std::swap(reordered["frames"][0], reordered["frames"][4]);
  expect_violation(reordered, "/round");

  auto missing = j;
  missing.erase("session");
  expect_violation(missing, "/session");

  auto bad_choice = j;
  bad_choice["private"]["base_choices"][0] = 9;
  expect_violation(bad_choice, "/private/base_choices/0");

  EXPECT_EQ(error_code_of([] { transcript_load("/nonexistent/dir/t.json"); }), Errc::IoFailure);
}

TEST(Params, JsonShape) {
  const GroupParams params{17, {2, 3, 5}, 4};
  const auto j = params_to_json(params);
  EXPECT_EQ(j.dump(), R"({"bases":["2","3","5"],"min_order":4,"p":"17"})");
  EXPECT_EQ(params_from_json(j), params);
  EXPECT_EQ(error_code_of([] { params_from_json(nlohmann::json::parse(R"({"p":17,"bases":[],"min_order":1})")); }),
            Errc::SchemaViolation);
}

TEST(Claim, JsonRoundTrip) {
  const VerificationClaim c{17, {2, 3, 5}, {7, 8, 0, 13}, "r-2024"};
  EXPECT_EQ(claim_from_json(claim_to_json(c)), c);
  EXPECT_EQ(error_code_of([] { claim_from_json(nlohmann::json::parse(R"({"p":"17","bases":["2"],"window":["1"]})")); }),
            Errc::SchemaViolation);
}
