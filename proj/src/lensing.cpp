// SPDX-License-Identifier: Apache-2.0
#include "trajgeo/lensing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "trajgeo/curvature.hpp"
#include "trajgeo/parallel.hpp"

namespace trajgeo {

namespace {

void require_same_shape(const Polyline& a, const Polyline& b) {
  if (a.dim() != b.dim() || a.size() != b.size()) {
    throw InputError("trajectory shapes differ: (" + std::to_string(a.size()) + " x " +
                     std::to_string(a.dim()) + ") vs (" + std::to_string(b.size()) + " x " +
                     std::to_string(b.dim()) + ")");
  }
}

Polyline second_differences(const Polyline& steps) {
  Polyline out(steps.dim(), steps.size() - 1);
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
    auto a = steps.point(i);
    auto b = steps.point(i + 1);
    auto o = out.point(i);
    for (std::size_t k = 0; k < steps.dim(); ++k) o[k] = b[k] - a[k];
  }
  return out;
}

double quantile_sorted(const std::vector<double>& v, double p) {
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + (v[hi] - v[lo]) * frac;
}

}  // namespace

const char* pairing_name(Pairing p) {
  switch (p) {
    case Pairing::kWithVsWithout: return "with_vs_without";
    case Pairing::kWithoutVsBase: return "without_vs_base";
    case Pairing::kWithVsBase: return "with_vs_base";
  }
  return "?";
}

const char* metric_name(DivergenceMetric m) {
  switch (m) {
    case DivergenceMetric::kDFinal: return "d_final";
    case DivergenceMetric::kDLayer: return "d_layer";
    case DivergenceMetric::kDeltaCurv: return "delta_curv";
    case DivergenceMetric::kDeltaTheta: return "delta_theta_rad";
  }
  return "?";
}

std::optional<double> final_separation(const Polyline& a, const Polyline& b) {
  require_same_shape(a, b);
  auto xa = a.point(a.size() - 1);
  auto xb = b.point(b.size() - 1);
  if (squared_norm(xa) == 0.0 || squared_norm(xb) == 0.0) return std::nullopt;
  return 1.0 - cosine(xa, xb);
}

double layer_separation(const Polyline& a, const Polyline& b) {
  require_same_shape(a, b);
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += distance(a.point(i), b.point(i));
  return total / static_cast<double>(a.size());
}

MeanWithCount curvature_divergence(const Polyline& a, const Polyline& b, double eps) {
  require_same_shape(a, b);
  MeanWithCount out;
  if (a.size() < 3) return out;
  const Polyline ga = second_differences(step_vectors(a));
  const Polyline gb = second_differences(step_vectors(b));
  out.total = ga.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < ga.size(); ++i) {
    auto u = ga.point(i);
    auto v = gb.point(i);
    const double nu = norm(u), nv = norm(v);
    if (nu < eps || nv < eps || nu == 0.0 || nv == 0.0) continue;
    sum += 1.0 - cosine(u, v);
    ++out.included;
  }
  if (out.included > 0) out.value = sum / static_cast<double>(out.included);
  return out;
}

MeanWithCount turning_angle_gap(const Polyline& a, const Polyline& b, double eps) {
  require_same_shape(a, b);
  MeanWithCount out;
  if (a.size() < 3) return out;
  const AngleSeries ta = turning_angles(step_vectors(a), eps);
  const AngleSeries tb = turning_angles(step_vectors(b), eps);
  out.total = ta.values.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < ta.values.size(); ++i) {
    if (!ta.values[i] || !tb.values[i]) continue;
    sum += std::fabs(*ta.values[i] - *tb.values[i]);
    ++out.included;
  }
  if (out.included > 0) out.value = sum / static_cast<double>(out.included);
  return out;
}

PairMetrics compare_pair(const Polyline& a, const Polyline& b, double eps) {
  PairMetrics m;
  m.d_final = final_separation(a, b);
  m.d_layer = layer_separation(a, b);
  m.delta_curv = curvature_divergence(a, b, eps);
  m.delta_theta = turning_angle_gap(a, b, eps);
  return m;
}

std::optional<double> DivergenceReport::value(Pairing p, DivergenceMetric m) const {
  const PairMetrics& pm = at(p);
  switch (m) {
    case DivergenceMetric::kDFinal: return pm.d_final;
    case DivergenceMetric::kDLayer: return pm.d_layer;
    case DivergenceMetric::kDeltaCurv: return pm.delta_curv.value;
    case DivergenceMetric::kDeltaTheta: return pm.delta_theta.value;
  }
  return std::nullopt;
}

DivergenceReport compare_triple(const SentenceTriple& t, double eps) {
  require_same_shape(t.with_traj, t.without_traj);
  require_same_shape(t.with_traj, t.base_traj);
  DivergenceReport r;
  r.triple_id = t.triple_id;
  r.pairs[static_cast<std::size_t>(Pairing::kWithVsWithout)] =
      compare_pair(t.with_traj, t.without_traj, eps);
  r.pairs[static_cast<std::size_t>(Pairing::kWithoutVsBase)] =
      compare_pair(t.without_traj, t.base_traj, eps);
  r.pairs[static_cast<std::size_t>(Pairing::kWithVsBase)] =
      compare_pair(t.with_traj, t.base_traj, eps);
  return r;
}

bool CohortSummary::ordering_holds(DivergenceMetric m) const {
  const auto& ww = at(Pairing::kWithVsWithout, m);
  const auto& wb = at(Pairing::kWithoutVsBase, m);
  const auto& base = at(Pairing::kWithVsBase, m);
  if (!ww || !wb || !base) return false;
  return ww->mean > base->mean && wb->mean > base->mean;
}

bool CohortSummary::ordering_holds() const {
  return std::all_of(kDivergenceMetrics.begin(), kDivergenceMetrics.end(),
                     [&](DivergenceMetric m) { return ordering_holds(m); });
}

CohortSummary summarize_cohort(const std::vector<DivergenceReport>& reports) {
  if (reports.empty()) throw InputError("summarize_cohort: no reports");
  CohortSummary out;
  out.triples = reports.size();
  for (Pairing p : kPairings) {
    for (DivergenceMetric m : kDivergenceMetrics) {
      std::vector<double> values;
      std::size_t excluded = 0;
      for (const auto& r : reports) {
        if (auto v = r.value(p, m)) values.push_back(*v);
        else ++excluded;
      }
      auto& slot = out.stats[static_cast<std::size_t>(p)][static_cast<std::size_t>(m)];
      if (values.empty()) continue;
      CohortStat s;
      s.n = values.size();
      s.excluded = excluded;
      double sum = 0.0;
      for (double v : values) sum += v;
      s.mean = sum / static_cast<double>(s.n);
      if (s.n >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
      }
      std::sort(values.begin(), values.end());
      s.min = values.front();
      s.max = values.back();
      s.q1 = quantile_sorted(values, 0.25);
      s.median = quantile_sorted(values, 0.5);
      s.q3 = quantile_sorted(values, 0.75);
      slot = s;
    }
  }
  return out;
}

std::vector<SentenceTriple> align_triples(const TrajectoryBundle& with_bundle,
                                          const TrajectoryBundle& without_bundle,
                                          const TrajectoryBundle& base_bundle) {
  if (with_bundle.dim != without_bundle.dim || with_bundle.dim != base_bundle.dim ||
      with_bundle.points_per_trajectory != without_bundle.points_per_trajectory ||
      with_bundle.points_per_trajectory != base_bundle.points_per_trajectory) {
    throw InputError("lensing bundles disagree on (points_per_trajectory, dim)");
  }
  auto index = [](const TrajectoryBundle& b) {
    std::map<std::string, const EmbeddingTrajectory*> m;
    for (const auto& t : b.trajectories) m.emplace(t.id, &t);
    return m;
  };
  const auto iw = index(with_bundle);
  const auto io = index(without_bundle);
  const auto ib = index(base_bundle);

  std::set<std::string> all;
  for (const auto* m : {&iw, &io, &ib}) {
    for (const auto& kv : *m) all.insert(kv.first);
  }
  std::vector<std::string> offending;
  for (const auto& id : all) {
    if (!iw.count(id) || !io.count(id) || !ib.count(id)) offending.push_back(id);
  }
  if (!offending.empty()) {
    std::string msg = "triple ids not present in all three bundles:";
    for (const auto& id : offending) msg += " " + id;
    throw InputError(msg);
  }

  std::vector<SentenceTriple> out;
  out.reserve(with_bundle.trajectories.size());
  for (const auto& t : with_bundle.trajectories) {
    out.push_back({t.id, t.to_polyline(), io.at(t.id)->to_polyline(), ib.at(t.id)->to_polyline()});
  }
  return out;
}

std::vector<DivergenceReport> compare_triples(const std::vector<SentenceTriple>& triples,
                                              std::size_t threads, double eps) {
  std::vector<DivergenceReport> out(triples.size());
  parallel_for(triples.size(), threads,
               [&](std::size_t i) { out[i] = compare_triple(triples[i], eps); });
  return out;
}

}  // namespace trajgeo
