// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "trajgeo/curvature.hpp"
#include "trajgeo/errors.hpp"
#include "trajgeo/null_model.hpp"

namespace trajgeo {

/// Right-tailed Monte-Carlo p-value with add-one smoothing:
/// (1 + #{delta <= 0}) / (S + 1). An undefined delta counts as <= 0.
double monte_carlo_p_value(const std::vector<double>& deltas);
double monte_carlo_p_value(const std::vector<std::optional<double>>& deltas);

/// Pooled observed-minus-null comparison over all trajectories.
///
/// R pooling uses only trajectories whose observed ratio is defined, for the
/// observed mean and every null mean alike. Within that set a degenerate null
/// draw is left out of its sample's mean; a sample with no usable draw has an
/// undefined delta.
struct PooledReport {
  std::int64_t c_pool_obs = 0;
  std::vector<std::int64_t> c_pool_null;
  std::vector<double> delta_c_pool;
  double p_mc_c = 1.0;

  std::optional<double> r_bar_obs;
  std::vector<std::optional<double>> r_bar_null;
  std::vector<std::optional<double>> delta_r_bar;
  double p_mc_r = 1.0;
  std::size_t r_trajectories = 0;         // trajectories entering the R pool
  std::size_t r_excluded_trajectories = 0;
  std::size_t r_degenerate_null_draws = 0;

  double mean_delta_c() const;
  std::optional<double> mean_delta_r() const;
};

/// One-sample t on paired differences D = observed - per-trajectory null mean.
struct PairedTest {
  std::size_t n = 0;
  std::optional<double> d_bar;
  std::optional<double> sd;   // denominator n - 1
  std::optional<double> t;
  std::optional<double> p;    // right-tailed
  std::size_t dof = 0;
  bool degenerate_variance = false;
  bool available = false;     // false when fewer than two usable differences
};

struct PairedReport {
  PairedTest c;
  PairedTest r;
  std::vector<double> d_c;                  // per trajectory, bundle order
  std::vector<std::optional<double>> d_r;   // nullopt when R undefined
};

PooledReport pooled_test(const std::vector<CurvatureSummary>& summaries,
                         const std::vector<NullDraws>& nulls);

PairedReport paired_test(const std::vector<CurvatureSummary>& summaries,
                         const std::vector<NullDraws>& nulls);

/// t-test on a vector of differences; throws InputError when fewer than two.
PairedTest one_sample_right_tailed_t(const std::vector<double>& differences);

}  // namespace trajgeo
