// SPDX-License-Identifier: Apache-2.0
#include "trajgeo/curvature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "trajgeo/errors.hpp"
#include "trajgeo/parallel.hpp"

namespace trajgeo {

double radians_to_degrees(double rad) { return rad * (180.0 / std::numbers::pi); }
double degrees_to_radians(double deg) { return deg * (std::numbers::pi / 180.0); }

Polyline step_vectors(const Polyline& points) {
  if (points.size() < 2) throw InputError("step_vectors: need at least two points");
  const std::size_t d = points.dim();
  Polyline steps(d, points.size() - 1);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    auto a = points.point(i);
    auto b = points.point(i + 1);
    auto out = steps.point(i);
    for (std::size_t k = 0; k < d; ++k) out[k] = b[k] - a[k];
  }
  return steps;
}

AngleSeries turning_angles(const Polyline& steps, double eps) {
  if (steps.size() < 2) throw InputError("turning_angles: need at least two steps");
  AngleSeries series;
  series.values.reserve(steps.size() - 1);
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
    auto a = steps.point(i);
    auto b = steps.point(i + 1);
    if (norm(a) < eps || norm(b) < eps || squared_norm(a) == 0.0 || squared_norm(b) == 0.0) {
      series.values.emplace_back(std::nullopt);
      continue;
    }
    series.values.emplace_back(std::acos(cosine(a, b)));
    ++series.defined_count;
  }
  return series;
}

double path_length(const Polyline& points) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    total += distance(points.point(i), points.point(i + 1));
  }
  return total;
}

double chord_length(const Polyline& points) {
  if (points.size() == 0) return 0.0;
  return distance(points.point(0), points.point(points.size() - 1));
}

std::optional<double> length_chord_ratio(const Polyline& points, double eps) {
  const double chord = chord_length(points);
  if (chord < eps || chord == 0.0) return std::nullopt;
  return path_length(points) / chord;
}

TailCounts tail_counts(const AngleSeries& angles, const AnalysisConfig& cfg) {
  cfg.validate();
  const double flat = degrees_to_radians(cfg.flat_threshold_deg);
  const double sharp = degrees_to_radians(cfg.sharp_threshold_deg);
  TailCounts counts;
  for (const auto& v : angles.values) {
    if (!v) continue;
    if (*v < flat) ++counts.flat;
    else if (*v > sharp) ++counts.sharp;
  }
  return counts;
}

CurvatureSummary summarize(const Polyline& points, std::string trajectory_id,
                           const AnalysisConfig& cfg) {
  CurvatureSummary s;
  s.trajectory_id = std::move(trajectory_id);
  const Polyline steps = step_vectors(points);
  if (steps.size() >= 2) s.angles = turning_angles(steps, cfg.degenerate_eps);
  s.path_length = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) s.path_length += norm(steps.point(i));
  s.chord = chord_length(points);
  if (s.chord >= cfg.degenerate_eps && s.chord > 0.0) s.ratio = s.path_length / s.chord;
  const TailCounts tails = tail_counts(s.angles, cfg);
  s.flat_count = tails.flat;
  s.sharp_count = tails.sharp;
  s.tail_count = tails.total();
  return s;
}

CurvatureSummary summarize(const EmbeddingTrajectory& traj, const AnalysisConfig& cfg) {
  return summarize(traj.to_polyline(), traj.id, cfg);
}

CorpusTotals corpus_totals(const std::vector<CurvatureSummary>& summaries) {
  CorpusTotals totals;
  totals.trajectories = summaries.size();
  double ratio_sum = 0.0;
  std::size_t ratio_n = 0;
  double angle_sum = 0.0;
  for (const auto& s : summaries) {
    totals.angles += s.angles.defined_count;
    totals.undefined_angles += s.angles.values.size() - s.angles.defined_count;
    totals.flat += s.flat_count;
    totals.sharp += s.sharp_count;
    for (const auto& v : s.angles.values) {
      if (v) angle_sum += *v;
    }
    if (s.ratio) {
      ratio_sum += *s.ratio;
      ++ratio_n;
    } else {
      ++totals.degenerate_ratio_count;
    }
  }
  if (ratio_n > 0) totals.mean_ratio = ratio_sum / static_cast<double>(ratio_n);
  if (totals.angles > 0) totals.mean_angle_rad = angle_sum / static_cast<double>(totals.angles);
  return totals;
}

std::vector<CurvatureSummary> summarize_bundle(const TrajectoryBundle& bundle,
                                               const AnalysisConfig& cfg, std::size_t threads) {
  cfg.validate();
  std::vector<CurvatureSummary> out(bundle.trajectories.size());
  parallel_for(out.size(), threads,
               [&](std::size_t i) { out[i] = summarize(bundle.trajectories[i], cfg); });
  return out;
}

}  // namespace trajgeo
