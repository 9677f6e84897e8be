// SPDX-License-Identifier: Apache-2.0
#include "trajgeo/null_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trajgeo/parallel.hpp"

namespace trajgeo {

void NullConfig::validate() const {
  if (samples < 1) throw std::invalid_argument("null samples must be >= 1");
}

const char* null_method_name(NullMethod m) {
  return m == NullMethod::kSubspace ? "subspace" : "ambient";
}

double NullDraws::mean_c() const {
  double s = 0.0;
  for (auto c : c_tilde) s += c;
  return c_tilde.empty() ? 0.0 : s / static_cast<double>(c_tilde.size());
}

double NullDraws::mean_flat() const {
  double s = 0.0;
  for (auto c : flat_tilde) s += c;
  return flat_tilde.empty() ? 0.0 : s / static_cast<double>(flat_tilde.size());
}

double NullDraws::mean_sharp() const {
  double s = 0.0;
  for (auto c : sharp_tilde) s += c;
  return sharp_tilde.empty() ? 0.0 : s / static_cast<double>(sharp_tilde.size());
}

std::optional<double> NullDraws::mean_r() const {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& r : r_tilde) {
    if (r) {
      s += *r;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return s / static_cast<double>(n);
}

std::vector<double> random_unit_vector(std::size_t dim, RandomStream& stream) {
  if (dim < 1) throw std::invalid_argument("random_unit_vector: dim must be >= 1");
  std::vector<double> v(dim);
  for (;;) {
    for (auto& x : v) x = stream.normal();
    const double n = norm(v);
    if (n > 0.0) {
      for (auto& x : v) x /= n;
      return v;
    }
  }
}

Polyline synthesize_null(std::span<const double> lengths, std::size_t dim, RandomStream& stream) {
  Polyline out(dim, lengths.size() + 1);
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const auto u = random_unit_vector(dim, stream);
    auto prev = out.point(i);
    auto next = out.point(i + 1);
    for (std::size_t k = 0; k < dim; ++k) next[k] = prev[k] + lengths[i] * u[k];
  }
  return out;
}

Polyline synthesize_null_subspace(std::span<const double> lengths, std::size_t dim,
                                  RandomStream& stream) {
  if (dim < 1) throw std::invalid_argument("synthesize_null_subspace: dim must be >= 1");
  const std::size_t steps = lengths.size();
  const std::size_t m = std::max<std::size_t>(1, std::min(dim, steps));
  Polyline out(m, steps + 1);
  std::vector<double> col(m);
  for (std::size_t j = 0; j < steps; ++j) {
    // Column j of the Bartlett factor: N(0,1) above the diagonal,
    // chi_{dim-j} on it, zero below; all N(0,1) once j >= dim.
    for (;;) {
      std::fill(col.begin(), col.end(), 0.0);
      const std::size_t upper = std::min(j, m);
      for (std::size_t i = 0; i < upper; ++i) col[i] = stream.normal();
      if (j < m) col[j] = stream.chi(static_cast<double>(dim - j));
      if (squared_norm(col) > 0.0) break;
    }
    const double n = norm(col);
    auto prev = out.point(j);
    auto next = out.point(j + 1);
    for (std::size_t k = 0; k < m; ++k) next[k] = prev[k] + lengths[j] * (col[k] / n);
  }
  return out;
}

std::vector<double> step_lengths(const Polyline& points) {
  std::vector<double> out;
  if (points.size() < 2) return out;
  out.reserve(points.size() - 1);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    out.push_back(distance(points.point(i), points.point(i + 1)));
  }
  return out;
}

namespace {

void draw_one(const std::vector<double>& lengths, std::size_t dim, const std::string& id,
              std::size_t s, const AnalysisConfig& cfg, const NullConfig& ncfg, NullDraws& out) {
  RandomStream stream(derive_stream_key(ncfg.base_seed, id, s));
  const Polyline null_traj = ncfg.method == NullMethod::kSubspace
                                 ? synthesize_null_subspace(lengths, dim, stream)
                                 : synthesize_null(lengths, dim, stream);
  const CurvatureSummary cs = summarize(null_traj, id, cfg);
  out.flat_tilde[s] = static_cast<std::uint32_t>(cs.flat_count);
  out.sharp_tilde[s] = static_cast<std::uint32_t>(cs.sharp_count);
  out.c_tilde[s] = static_cast<std::uint32_t>(cs.tail_count);
  out.r_tilde[s] = cs.ratio;
}

NullDraws allocate(const std::string& id, std::size_t samples) {
  NullDraws d;
  d.trajectory_id = id;
  d.c_tilde.resize(samples);
  d.flat_tilde.resize(samples);
  d.sharp_tilde.resize(samples);
  d.r_tilde.resize(samples);
  return d;
}

}  // namespace

NullDraws null_statistics(const Polyline& points, const std::string& trajectory_id,
                          const AnalysisConfig& cfg, const NullConfig& ncfg, std::size_t threads) {
  cfg.validate();
  ncfg.validate();
  const auto lengths = step_lengths(points);
  NullDraws draws = allocate(trajectory_id, ncfg.samples);
  parallel_for(ncfg.samples, threads, [&](std::size_t s) {
    draw_one(lengths, points.dim(), trajectory_id, s, cfg, ncfg, draws);
  });
  return draws;
}

NullDraws null_statistics(const EmbeddingTrajectory& traj, const AnalysisConfig& cfg,
                          const NullConfig& ncfg, std::size_t threads) {
  return null_statistics(traj.to_polyline(), traj.id, cfg, ncfg, threads);
}

std::vector<NullDraws> null_statistics_bundle(const TrajectoryBundle& bundle,
                                              const AnalysisConfig& cfg, const NullConfig& ncfg,
                                              std::size_t threads) {
  cfg.validate();
  ncfg.validate();
  const std::size_t T = bundle.trajectories.size();
  std::vector<std::vector<double>> lengths(T);
  std::vector<NullDraws> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    lengths[t] = step_lengths(bundle.trajectories[t].to_polyline());
    out[t] = allocate(bundle.trajectories[t].id, ncfg.samples);
  }
  parallel_for(T * ncfg.samples, threads, [&](std::size_t flat) {
    const std::size_t t = flat / ncfg.samples;
    const std::size_t s = flat % ncfg.samples;
    draw_one(lengths[t], bundle.dim, bundle.trajectories[t].id, s, cfg, ncfg, out[t]);
  });
  return out;
}

}  // namespace trajgeo
