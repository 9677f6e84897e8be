// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "trajgeo/bundle.hpp"
#include "trajgeo/polyline.hpp"

namespace trajgeo {

/// Turning angles theta_1..theta_{L-1} in radians; std::nullopt marks an
/// angle whose adjacent steps are shorter than the degeneracy threshold.
struct AngleSeries {
  std::vector<std::optional<double>> values;
  std::size_t defined_count = 0;
};

struct TailCounts {
  std::size_t flat = 0;
  std::size_t sharp = 0;
  std::size_t total() const { return flat + sharp; }
};

struct CurvatureSummary {
  std::string trajectory_id;
  AngleSeries angles;
  double path_length = 0.0;
  double chord = 0.0;
  std::optional<double> ratio;  // nullopt when the chord is degenerate
  std::size_t flat_count = 0;
  std::size_t sharp_count = 0;
  std::size_t tail_count = 0;
};

/// Delta_i = x_i - x_{i-1}; the result holds points-1 steps.
Polyline step_vectors(const Polyline& points);

AngleSeries turning_angles(const Polyline& steps, double eps);

/// Sum of step norms; the polyline arc length.
double path_length(const Polyline& points);
double chord_length(const Polyline& points);

/// Arc length over endpoint distance, or nullopt when the chord is below eps.
std::optional<double> length_chord_ratio(const Polyline& points, double eps);

/// Strict-inequality tail counts; undefined angles and angles exactly on a
/// threshold fall in neither tail.
TailCounts tail_counts(const AngleSeries& angles, const AnalysisConfig& cfg);

CurvatureSummary summarize(const Polyline& points, std::string trajectory_id,
                           const AnalysisConfig& cfg);
CurvatureSummary summarize(const EmbeddingTrajectory& traj, const AnalysisConfig& cfg);

/// Corpus-level totals in the layout of a flat/sharp/average-R table.
struct CorpusTotals {
  std::size_t trajectories = 0;
  std::size_t angles = 0;            // defined angles
  std::size_t undefined_angles = 0;
  std::size_t flat = 0;
  std::size_t sharp = 0;
  std::optional<double> mean_ratio;  // over non-degenerate trajectories
  std::size_t degenerate_ratio_count = 0;
  std::optional<double> mean_angle_rad;
};

CorpusTotals corpus_totals(const std::vector<CurvatureSummary>& summaries);

/// Summaries for every trajectory of a bundle, computed in parallel with
/// results identical to a sequential run.
std::vector<CurvatureSummary> summarize_bundle(const TrajectoryBundle& bundle,
                                               const AnalysisConfig& cfg,
                                               std::size_t threads = 0);

double radians_to_degrees(double rad);
double degrees_to_radians(double deg);

}  // namespace trajgeo
