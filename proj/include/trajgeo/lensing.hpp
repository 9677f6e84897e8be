// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "trajgeo/bundle.hpp"
#include "trajgeo/errors.hpp"
#include "trajgeo/polyline.hpp"

namespace trajgeo {

/// Cosine distance between final points; nullopt if either has zero norm.
std::optional<double> final_separation(const Polyline& a, const Polyline& b);

/// Mean Euclidean distance between corresponding points.
double layer_separation(const Polyline& a, const Polyline& b);

/// A mean over the indices where the per-index term is defined, with the
/// number of indices that contributed.
struct MeanWithCount {
  std::optional<double> value;
  std::size_t included = 0;
  std::size_t total = 0;
};

/// Mean of 1 - cos(Gamma_a_i, Gamma_b_i) over second differences
/// Gamma_i = Delta_{i+1} - Delta_i, skipping indices where either is
/// shorter than eps.
MeanWithCount curvature_divergence(const Polyline& a, const Polyline& b, double eps = 1e-12);

/// Mean |theta_a_i - theta_b_i| in radians over indices defined in both.
MeanWithCount turning_angle_gap(const Polyline& a, const Polyline& b, double eps = 1e-12);

struct PairMetrics {
  std::optional<double> d_final;
  double d_layer = 0.0;
  MeanWithCount delta_curv;
  MeanWithCount delta_theta;
};

PairMetrics compare_pair(const Polyline& a, const Polyline& b, double eps = 1e-12);

enum class Pairing : std::size_t { kWithVsWithout = 0, kWithoutVsBase = 1, kWithVsBase = 2 };
inline constexpr std::array<Pairing, 3> kPairings = {Pairing::kWithVsWithout,
                                                      Pairing::kWithoutVsBase,
                                                      Pairing::kWithVsBase};
const char* pairing_name(Pairing p);

enum class DivergenceMetric : std::size_t { kDFinal = 0, kDLayer = 1, kDeltaCurv = 2, kDeltaTheta = 3 };
inline constexpr std::array<DivergenceMetric, 4> kDivergenceMetrics = {
    DivergenceMetric::kDFinal, DivergenceMetric::kDLayer, DivergenceMetric::kDeltaCurv,
    DivergenceMetric::kDeltaTheta};
const char* metric_name(DivergenceMetric m);

struct SentenceTriple {
  std::string triple_id;
  Polyline with_traj;
  Polyline without_traj;
  Polyline base_traj;
};

struct DivergenceReport {
  std::string triple_id;
  std::array<PairMetrics, 3> pairs;  // indexed by Pairing

  const PairMetrics& at(Pairing p) const { return pairs[static_cast<std::size_t>(p)]; }
  std::optional<double> value(Pairing p, DivergenceMetric m) const;
};

DivergenceReport compare_triple(const SentenceTriple& triple, double eps = 1e-12);

struct CohortStat {
  std::size_t n = 0;           // reports with a defined value
  std::size_t excluded = 0;    // reports where the metric was degenerate
  double mean = 0.0;
  std::optional<double> sd;    // n - 1 denominator; nullopt when n < 2
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Box-plot statistics for every (pairing, metric). Quartiles interpolate
/// linearly between order statistics (position p * (n - 1)).
struct CohortSummary {
  std::size_t triples = 0;
  std::array<std::array<std::optional<CohortStat>, 4>, 3> stats;  // [pairing][metric]

  const std::optional<CohortStat>& at(Pairing p, DivergenceMetric m) const {
    return stats[static_cast<std::size_t>(p)][static_cast<std::size_t>(m)];
  }
  /// True when with_vs_without and without_vs_base means both exceed the
  /// with_vs_base mean on all four metrics.
  bool ordering_holds() const;
  bool ordering_holds(DivergenceMetric m) const;
};

CohortSummary summarize_cohort(const std::vector<DivergenceReport>& reports);

/// Pairs the three bundles by trajectory id (the triple id), in the order of
/// the `with` bundle. Throws InputError listing every id that is missing
/// from one of the bundles, or on a shape mismatch.
std::vector<SentenceTriple> align_triples(const TrajectoryBundle& with_bundle,
                                          const TrajectoryBundle& without_bundle,
                                          const TrajectoryBundle& base_bundle);

std::vector<DivergenceReport> compare_triples(const std::vector<SentenceTriple>& triples,
                                              std::size_t threads = 0, double eps = 1e-12);

}  // namespace trajgeo
