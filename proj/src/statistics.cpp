// SPDX-License-Identifier: Apache-2.0
#include "trajgeo/statistics.hpp"

#include <cmath>
#include <string>

#include "trajgeo/special_functions.hpp"

namespace trajgeo {

namespace {

void check_alignment(const std::vector<CurvatureSummary>& summaries,
                     const std::vector<NullDraws>& nulls) {
  if (summaries.size() != nulls.size()) {
    throw InputError("pooled/paired test: " + std::to_string(summaries.size()) +
                     " summaries but " + std::to_string(nulls.size()) + " null draw sets");
  }
  for (std::size_t t = 0; t < summaries.size(); ++t) {
    if (summaries[t].trajectory_id != nulls[t].trajectory_id) {
      throw InputError("trajectory id mismatch at position " + std::to_string(t) + ": '" +
                       summaries[t].trajectory_id + "' vs '" + nulls[t].trajectory_id + "'");
    }
    if (nulls[t].samples() != nulls.front().samples() || nulls[t].r_tilde.size() != nulls[t].samples()) {
      throw InputError("null draw sets have unequal sample counts (trajectory '" +
                       nulls[t].trajectory_id + "')");
    }
  }
}

}  // namespace

double monte_carlo_p_value(const std::vector<double>& deltas) {
  std::size_t at_or_below = 0;
  for (double d : deltas) {
    if (!(d > 0.0)) ++at_or_below;
  }
  return (1.0 + static_cast<double>(at_or_below)) / (static_cast<double>(deltas.size()) + 1.0);
}

double monte_carlo_p_value(const std::vector<std::optional<double>>& deltas) {
  std::size_t at_or_below = 0;
  for (const auto& d : deltas) {
    if (!d || !(*d > 0.0)) ++at_or_below;
  }
  return (1.0 + static_cast<double>(at_or_below)) / (static_cast<double>(deltas.size()) + 1.0);
}

double PooledReport::mean_delta_c() const {
  double s = 0.0;
  for (double d : delta_c_pool) s += d;
  return delta_c_pool.empty() ? 0.0 : s / static_cast<double>(delta_c_pool.size());
}

std::optional<double> PooledReport::mean_delta_r() const {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& d : delta_r_bar) {
    if (d) {
      s += *d;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return s / static_cast<double>(n);
}

PooledReport pooled_test(const std::vector<CurvatureSummary>& summaries,
                         const std::vector<NullDraws>& nulls) {
  check_alignment(summaries, nulls);
  const std::size_t T = summaries.size();
  const std::size_t S = T == 0 ? 0 : nulls.front().samples();
  PooledReport rep;

  for (const auto& s : summaries) rep.c_pool_obs += static_cast<std::int64_t>(s.tail_count);
  rep.c_pool_null.assign(S, 0);
  for (const auto& n : nulls) {
    for (std::size_t s = 0; s < S; ++s) rep.c_pool_null[s] += n.c_tilde[s];
  }
  rep.delta_c_pool.resize(S);
  for (std::size_t s = 0; s < S; ++s) {
    rep.delta_c_pool[s] = static_cast<double>(rep.c_pool_obs - rep.c_pool_null[s]);
  }
  rep.p_mc_c = monte_carlo_p_value(rep.delta_c_pool);

  double obs_sum = 0.0;
  std::vector<std::size_t> pool;
  for (std::size_t t = 0; t < T; ++t) {
    if (summaries[t].ratio) {
      obs_sum += *summaries[t].ratio;
      pool.push_back(t);
    }
  }
  rep.r_trajectories = pool.size();
  rep.r_excluded_trajectories = T - pool.size();
  if (!pool.empty()) rep.r_bar_obs = obs_sum / static_cast<double>(pool.size());

  rep.r_bar_null.assign(S, std::nullopt);
  rep.delta_r_bar.assign(S, std::nullopt);
  for (std::size_t s = 0; s < S; ++s) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t t : pool) {
      const auto& r = nulls[t].r_tilde[s];
      if (r) {
        sum += *r;
        ++n;
      } else {
        ++rep.r_degenerate_null_draws;
      }
    }
    if (n > 0) {
      rep.r_bar_null[s] = sum / static_cast<double>(n);
      rep.delta_r_bar[s] = *rep.r_bar_obs - *rep.r_bar_null[s];
    }
  }
  rep.p_mc_r = monte_carlo_p_value(rep.delta_r_bar);
  return rep;
}

PairedTest one_sample_right_tailed_t(const std::vector<double>& d) {
  if (d.size() < 2) throw InputError("paired t-test needs at least two trajectories");
  PairedTest out;
  out.available = true;
  out.n = d.size();
  out.dof = d.size() - 1;
  double sum = 0.0;
  for (double v : d) sum += v;
  const double mean = sum / static_cast<double>(d.size());
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(out.dof));
  out.d_bar = mean;
  out.sd = sd;
  if (sd == 0.0) {
    out.degenerate_variance = true;
    if (mean == 0.0) {
      out.t = 0.0;
      out.p = 0.5;
    } else {
      out.p = mean > 0.0 ? 0.0 : 1.0;
    }
    return out;
  }
  out.t = mean / (sd / std::sqrt(static_cast<double>(d.size())));
  out.p = student_t_sf(*out.t, static_cast<double>(out.dof));
  return out;
}

PairedReport paired_test(const std::vector<CurvatureSummary>& summaries,
                         const std::vector<NullDraws>& nulls) {
  check_alignment(summaries, nulls);
  if (summaries.size() < 2) throw InputError("paired t-test needs at least two trajectories");
  PairedReport rep;
  std::vector<double> dr_defined;
  for (std::size_t t = 0; t < summaries.size(); ++t) {
    rep.d_c.push_back(static_cast<double>(summaries[t].tail_count) - nulls[t].mean_c());
    const auto mu_r = nulls[t].mean_r();
    if (summaries[t].ratio && mu_r) {
      rep.d_r.emplace_back(*summaries[t].ratio - *mu_r);
      dr_defined.push_back(*rep.d_r.back());
    } else {
      rep.d_r.emplace_back(std::nullopt);
    }
  }
  rep.c = one_sample_right_tailed_t(rep.d_c);
  if (dr_defined.size() >= 2) {
    rep.r = one_sample_right_tailed_t(dr_defined);
  } else {
    rep.r.n = dr_defined.size();
  }
  return rep;
}

}  // namespace trajgeo
