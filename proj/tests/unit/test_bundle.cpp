// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "oracles.hpp"
#include "trajgeo/bundle.hpp"

using namespace trajgeo;

namespace {

TrajectoryBundle tiny() {
  TrajectoryBundle b;
  b.model_name = "tiny";
  b.dim = 2;
  b.points_per_trajectory = 2;
  EmbeddingTrajectory t;
  t.id = "a";
  t.token_text = "x";
  t.sentence_id = "s0";
  t.word_index = 0;
  t.dim = 2;
  t.coords = {0.0f, 1.0f, 2.0f, 3.5f};
  b.trajectories.push_back(t);
  return b;
}

std::uint32_t read_u32(const std::vector<std::uint8_t>& b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | static_cast<std::uint32_t>(b[off + 1]) << 8 |
         static_cast<std::uint32_t>(b[off + 2]) << 16 | static_cast<std::uint32_t>(b[off + 3]) << 24;
}

}  // namespace

TEST_CASE("smallest legal bundle loads") {
  const auto bytes = save_bundle(tiny());
  const TrajectoryBundle b = load_bundle(bytes);
  REQUIRE(b.trajectories.size() == 1);
  CHECK(b.trajectories[0].num_points() == 2);
  CHECK(b.trajectories[0].coords == std::vector<float>{0.0f, 1.0f, 2.0f, 3.5f});
  CHECK(b == tiny());
}

TEST_CASE("byte layout is magic, u16 version, u32 header length, header, float32 payload") {
  const auto bytes = save_bundle(tiny());
  CHECK(std::memcmp(bytes.data(), "EMTJ", 4) == 0);
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  const std::uint32_t hlen = read_u32(bytes, 6);
  const std::string header(bytes.begin() + 10, bytes.begin() + 10 + hlen);
  CHECK(header.find("\"model_name\":\"tiny\"") != std::string::npos);
  CHECK(bytes.size() == 10 + hlen + 16);
  float last;
  const std::uint32_t raw = read_u32(bytes, 10 + hlen + 12);
  std::memcpy(&last, &raw, 4);
  CHECK(last == 3.5f);
}

TEST_CASE("mismatched dim is a data error") {
  TrajectoryBundle b = tiny();
  b.trajectories[0].dim = 3;
  b.trajectories[0].coords.push_back(0.0f);
  b.trajectories[0].coords.push_back(0.0f);
  CHECK_THROWS_AS(validate_bundle(b), DataError);
  CHECK_THROWS_AS(save_bundle(b), ValidationError);

  // A file whose per-trajectory shape disagrees with the bundle shape.
  auto bytes = save_bundle(tiny());
  const std::uint32_t hlen = read_u32(bytes, 6);
  std::string header(bytes.begin() + 10, bytes.begin() + 10 + hlen);
  const auto pos = header.find("\"dim\":2,\"points\"");
  REQUIRE(pos != std::string::npos);
  header[pos + 6] = '3';
  std::copy(header.begin(), header.end(), bytes.begin() + 10);
  try {
    load_bundle(bytes);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.trajectory_id() == "a");
  }
}

TEST_CASE("non-finite payload value reports trajectory and index") {
  TrajectoryBundle b = tiny();
  auto bytes = save_bundle(b);
  const std::uint32_t hlen = read_u32(bytes, 6);
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(bytes.data() + 10 + hlen + 8, &nan, 4);
  try {
    load_bundle(bytes);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.trajectory_id() == "a");
    CHECK(e.index() == 2);
  }
}

TEST_CASE("bad magic, bad version and truncation") {
  auto bytes = save_bundle(tiny());
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(load_bundle(bad), FormatError);
  bad = bytes;
  bad[4] = 2;
  CHECK_THROWS_AS(load_bundle(bad), FormatError);
  bad = bytes;
  bad.pop_back();
  CHECK_THROWS_AS(load_bundle(bad), TruncationError);
  bad = bytes;
  bad.push_back(0);
  CHECK_THROWS_AS(load_bundle(bad), TruncationError);
  CHECK_THROWS_AS(load_bundle(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 7)),
                  TruncationError);
  CHECK_THROWS_AS(load_bundle(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 20)),
                  TruncationError);
}

TEST_CASE("declared payload size must equal n x points x dim x 4") {
  auto bytes = save_bundle(tiny());
  const std::uint32_t hlen = read_u32(bytes, 6);
  std::string header(bytes.begin() + 10, bytes.begin() + 10 + hlen);
  const auto pos = header.find("\"payload_bytes\":16");
  REQUIRE(pos != std::string::npos);
  header.replace(pos, 18, "\"payload_bytes\":12");
  std::vector<std::uint8_t> edited(bytes.begin(), bytes.begin() + 10);
  edited.insert(edited.end(), header.begin(), header.end());
  edited.insert(edited.end(), bytes.begin() + 10 + hlen, bytes.end() - 4);
  CHECK_THROWS_AS(load_bundle(edited), TruncationError);
}

TEST_CASE("invariant violations on write") {
  TrajectoryBundle b = tiny();
  b.trajectories.push_back(b.trajectories[0]);
  CHECK_THROWS_AS(save_bundle(b), ValidationError);  // duplicate id

  b = tiny();
  b.points_per_trajectory = 1;
  b.trajectories[0].coords.resize(2);
  CHECK_THROWS_AS(save_bundle(b), ValidationError);

  b = tiny();
  b.trajectories[0].coords[1] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(save_bundle(b), ValidationError);

  b = tiny();
  b.trajectories[0].word_index = -1;
  CHECK_THROWS_AS(save_bundle(b), ValidationError);

  b = tiny();
  b.trajectories[0].token_text = std::string("\xff\xfe", 2);
  CHECK_THROWS_AS(save_bundle(b), ValidationError);
}

TEST_CASE("empty trajectory list gives a valid file with zero-length payload") {
  TrajectoryBundle b;
  b.model_name = "empty";
  b.dim = 4;
  b.points_per_trajectory = 3;
  const auto bytes = save_bundle(b);
  const std::uint32_t hlen = read_u32(bytes, 6);
  CHECK(bytes.size() == 10 + hlen);
  CHECK(load_bundle(bytes) == b);
}

TEST_CASE("serialization is deterministic and round-trips bit-exactly") {
  const TrajectoryBundle b = oracle::random_bundle(100, 13, 24, 7);
  const auto first = save_bundle(b);
  CHECK(save_bundle(b) == first);
  const TrajectoryBundle back = load_bundle(first);
  CHECK(back == b);
  CHECK(save_bundle(back) == first);
}

TEST_CASE("round-trip over many random shapes") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const TrajectoryBundle b = oracle::random_bundle(seed % 7, 2 + seed % 5, 1 + seed % 9, seed);
    const auto bytes = save_bundle(b);
    const TrajectoryBundle back = load_bundle(bytes);
    REQUIRE(back.trajectories.size() == b.trajectories.size());
    for (std::size_t t = 0; t < b.trajectories.size(); ++t) {
      CHECK(std::memcmp(back.trajectories[t].coords.data(), b.trajectories[t].coords.data(),
                        b.trajectories[t].coords.size() * 4) == 0);
    }
    CHECK(save_bundle(back) == bytes);
  }
}

TEST_CASE("non-ASCII metadata survives the round trip") {
  TrajectoryBundle b = tiny();
  b.trajectories[0].token_text = "caf\xc3\xa9";
  b.model_name = "mod\xc3\xa8le";
  CHECK(load_bundle(save_bundle(b)) == b);
}

TEST_CASE("file helpers") {
  const std::string path = "test_bundle_roundtrip.emtj";
  write_bundle_file(path, tiny());
  CHECK(read_bundle_file(path) == tiny());
  CHECK_THROWS_AS(read_bundle_file("does/not/exist.emtj"), IoError);
  std::remove(path.c_str());
}

TEST_CASE("analysis config thresholds") {
  AnalysisConfig c;
  CHECK_NOTHROW(c.validate());
  c.flat_threshold_deg = 100;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = AnalysisConfig{};
  c.sharp_threshold_deg = 180;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = AnalysisConfig{};
  c.flat_threshold_deg = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
