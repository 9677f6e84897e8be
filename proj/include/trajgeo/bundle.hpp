// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "trajgeo/polyline.hpp"

namespace trajgeo {

inline constexpr std::uint16_t kBundleSchemaVersion = 1;

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Base class for every error raised while reading, writing or validating a
/// trajectory bundle.
class BundleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad magic, unsupported schema version, or an unparseable header.
class FormatError : public BundleError {
 public:
  using BundleError::BundleError;
};

/// The byte stream ends early or carries trailing bytes.
class TruncationError : public BundleError {
 public:
  using BundleError::BundleError;
};

/// Decoded content violates a bundle invariant. Carries the offending
/// trajectory id and, where applicable, the flat coordinate index.
class DataError : public BundleError {
 public:
  DataError(const std::string& what, std::string trajectory_id, std::ptrdiff_t index = -1)
      : BundleError(what), trajectory_id_(std::move(trajectory_id)), index_(index) {}
  const std::string& trajectory_id() const { return trajectory_id_; }
  std::ptrdiff_t index() const { return index_; }

 private:
  std::string trajectory_id_;
  std::ptrdiff_t index_;
};

/// Raised by save_bundle on an in-memory bundle that breaks an invariant.
class ValidationError : public BundleError {
 public:
  using BundleError::BundleError;
};

/// Layerwise hidden states of one token: points x_0..x_L, each of dimension dim.
struct EmbeddingTrajectory {
  std::string id;
  std::string token_text;
  std::string sentence_id;
  std::int64_t word_index = 0;
  std::size_t dim = 0;
  std::vector<float> coords;  // point-major, size = points * dim

  std::size_t num_points() const { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const float> point(std::size_t i) const { return {coords.data() + i * dim, dim}; }
  Polyline to_polyline() const;

  bool operator==(const EmbeddingTrajectory&) const = default;
};

struct TrajectoryBundle {
  std::uint16_t schema_version = kBundleSchemaVersion;
  std::string model_name;
  std::size_t dim = 0;
  std::size_t points_per_trajectory = 0;
  std::vector<EmbeddingTrajectory> trajectories;

  bool operator==(const TrajectoryBundle&) const = default;
};

struct AnalysisConfig {
  double flat_threshold_deg = 80.0;
  double sharp_threshold_deg = 100.0;
  double degenerate_eps = 1e-12;

  /// Throws std::invalid_argument unless 0 < flat < sharp < 180 and eps >= 0.
  void validate() const;
};

/// Checks every bundle invariant. Throws DataError (or ValidationError when
/// `for_write` is set) naming the first violation.
void validate_bundle(const TrajectoryBundle& bundle, bool for_write = false);

TrajectoryBundle load_bundle(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> save_bundle(const TrajectoryBundle& bundle);

TrajectoryBundle read_bundle_file(const std::string& path);
void write_bundle_file(const std::string& path, const TrajectoryBundle& bundle);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);

}  // namespace trajgeo
