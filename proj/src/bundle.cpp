// SPDX-License-Identifier: Apache-2.0
#include "trajgeo/bundle.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace trajgeo {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'E', 'M', 'T', 'J'};
constexpr std::size_t kPreambleBytes = 4 + 2 + 4;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

template <typename T>
T require_field(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(std::string("bundle header: missing key '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(std::string("bundle header: key '") + key + "' has the wrong type");
  }
}

}  // namespace

Polyline EmbeddingTrajectory::to_polyline() const {
  return Polyline(dim, std::vector<double>(coords.begin(), coords.end()));
}

void AnalysisConfig::validate() const {
  if (!(flat_threshold_deg > 0.0 && flat_threshold_deg < sharp_threshold_deg &&
        sharp_threshold_deg < 180.0)) {
    throw std::invalid_argument("thresholds must satisfy 0 < flat < sharp < 180 degrees");
  }
  if (!(degenerate_eps >= 0.0) || !std::isfinite(degenerate_eps)) {
    throw std::invalid_argument("degenerate_eps must be finite and non-negative");
  }
}

void validate_bundle(const TrajectoryBundle& bundle, bool for_write) {
  auto fail = [&](const std::string& msg, const std::string& id, std::ptrdiff_t index = -1) {
    if (for_write) throw ValidationError(msg);
    throw DataError(msg, id, index);
  };
  if (bundle.dim < 1) fail("bundle dim must be >= 1", "");
  if (bundle.points_per_trajectory < 2) fail("points_per_trajectory must be >= 2", "");

  std::unordered_set<std::string> seen;
  for (const auto& t : bundle.trajectories) {
    if (!seen.insert(t.id).second) fail("duplicate trajectory id '" + t.id + "'", t.id);
    if (t.dim != bundle.dim) {
      fail("trajectory '" + t.id + "' has dim " + std::to_string(t.dim) + ", bundle dim is " +
               std::to_string(bundle.dim),
           t.id);
    }
    if (t.coords.size() != bundle.points_per_trajectory * bundle.dim) {
      fail("trajectory '" + t.id + "' has the wrong number of coordinates", t.id);
    }
    if (t.word_index < 0) fail("trajectory '" + t.id + "' has a negative word_index", t.id);
    for (std::size_t k = 0; k < t.coords.size(); ++k) {
      if (!std::isfinite(t.coords[k])) {
        fail("trajectory '" + t.id + "' has a non-finite value at index " + std::to_string(k),
             t.id, static_cast<std::ptrdiff_t>(k));
      }
    }
  }
}

TrajectoryBundle load_bundle(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size() || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw FormatError("not an EMTJ bundle (bad magic)");
  }
  if (bytes.size() < kPreambleBytes) throw TruncationError("bundle preamble is truncated");

  TrajectoryBundle bundle;
  bundle.schema_version = get_u16(bytes.data() + 4);
  if (bundle.schema_version != kBundleSchemaVersion) {
    throw FormatError("unsupported schema_version " + std::to_string(bundle.schema_version));
  }
  const std::uint32_t header_len = get_u32(bytes.data() + 6);
  if (bytes.size() - kPreambleBytes < header_len) {
    throw TruncationError("bundle header is truncated");
  }

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + kPreambleBytes,
                                   bytes.begin() + kPreambleBytes + header_len);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("bundle header is not valid JSON: ") + e.what());
  }
  if (!header.is_object()) throw FormatError("bundle header must be a JSON object");

  bundle.model_name = require_field<std::string>(header, "model_name");
  bundle.dim = require_field<std::size_t>(header, "dim");
  bundle.points_per_trajectory = require_field<std::size_t>(header, "points_per_trajectory");
  const auto count = require_field<std::size_t>(header, "num_trajectories");
  const auto declared_payload = require_field<std::uint64_t>(header, "payload_bytes");
  const auto& meta = header.find("trajectories");
  if (meta == header.end() || !meta->is_array()) {
    throw FormatError("bundle header: 'trajectories' must be an array");
  }
  if (meta->size() != count) {
    throw FormatError("bundle header: num_trajectories disagrees with metadata length");
  }

  const std::uint64_t expected_payload =
      static_cast<std::uint64_t>(count) * bundle.points_per_trajectory * bundle.dim * 4;
  if (declared_payload != expected_payload) {
    throw TruncationError("declared payload of " + std::to_string(declared_payload) +
                          " bytes disagrees with num_trajectories x points x dim x 4 = " +
                          std::to_string(expected_payload));
  }
  const std::size_t payload_offset = kPreambleBytes + header_len;
  if (bytes.size() - payload_offset != declared_payload) {
    throw TruncationError("payload holds " + std::to_string(bytes.size() - payload_offset) +
                          " bytes, header declares " + std::to_string(declared_payload));
  }

  const std::uint8_t* cursor = bytes.data() + payload_offset;
  bundle.trajectories.reserve(count);
  for (const auto& m : *meta) {
    EmbeddingTrajectory t;
    t.id = require_field<std::string>(m, "id");
    t.token_text = require_field<std::string>(m, "token_text");
    t.sentence_id = require_field<std::string>(m, "sentence_id");
    t.word_index = require_field<std::int64_t>(m, "word_index");
    t.dim = require_field<std::size_t>(m, "dim");
    const auto points = require_field<std::size_t>(m, "points");
    if (t.dim != bundle.dim || points != bundle.points_per_trajectory) {
      throw DataError("trajectory '" + t.id + "' declares shape (" + std::to_string(points) +
                          " x " + std::to_string(t.dim) + "), bundle shape is (" +
                          std::to_string(bundle.points_per_trajectory) + " x " +
                          std::to_string(bundle.dim) + ")",
                      t.id);
    }
    const std::size_t n = bundle.points_per_trajectory * bundle.dim;
    t.coords.resize(n);
    for (std::size_t k = 0; k < n; ++k, cursor += 4) {
      t.coords[k] = std::bit_cast<float>(get_u32(cursor));
    }
    bundle.trajectories.push_back(std::move(t));
  }
  validate_bundle(bundle);
  return bundle;
}

std::vector<std::uint8_t> save_bundle(const TrajectoryBundle& bundle) {
  if (bundle.schema_version != kBundleSchemaVersion) {
    throw ValidationError("cannot write schema_version " + std::to_string(bundle.schema_version));
  }
  validate_bundle(bundle, /*for_write=*/true);

  nlohmann::ordered_json header;
  header["model_name"] = bundle.model_name;
  header["dim"] = bundle.dim;
  header["points_per_trajectory"] = bundle.points_per_trajectory;
  header["num_trajectories"] = bundle.trajectories.size();
  header["payload_bytes"] = static_cast<std::uint64_t>(bundle.trajectories.size()) *
                            bundle.points_per_trajectory * bundle.dim * 4;
  auto& meta = header["trajectories"] = nlohmann::ordered_json::array();
  for (const auto& t : bundle.trajectories) {
    nlohmann::ordered_json m;
    m["id"] = t.id;
    m["token_text"] = t.token_text;
    m["sentence_id"] = t.sentence_id;
    m["word_index"] = t.word_index;
    m["dim"] = t.dim;
    m["points"] = t.num_points();
    meta.push_back(std::move(m));
  }
  std::string text;
  try {
    text = header.dump();
  } catch (const nlohmann::json::type_error& e) {
    throw ValidationError(std::string("bundle metadata is not valid UTF-8: ") + e.what());
  }
  if (text.size() > 0xffffffffu) throw ValidationError("bundle header exceeds 4 GiB");

  std::vector<std::uint8_t> out;
  out.reserve(kPreambleBytes + text.size() + header["payload_bytes"].get<std::size_t>());
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  put_u16(out, bundle.schema_version);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& t : bundle.trajectories) {
    for (float v : t.coords) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return bytes;
}

TrajectoryBundle read_bundle_file(const std::string& path) {
  return load_bundle(read_file_bytes(path));
}

void write_bundle_file(const std::string& path, const TrajectoryBundle& bundle) {
  const auto bytes = save_bundle(bundle);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error while writing '" + path + "'");
}

}  // namespace trajgeo
