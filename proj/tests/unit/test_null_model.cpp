// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "trajgeo/null_model.hpp"

using namespace trajgeo;

namespace {

double cosine_of(std::span<const double> a, std::span<const double> b) {
  return dot(a, b) / (norm(a) * norm(b));
}

struct AngleTally {
  std::size_t n = 0, flat = 0, sharp = 0;
  double sum_deg = 0.0, sum_cos = 0.0;
};

void tally(const Polyline& p, AngleTally& t) {
  const Polyline s = step_vectors(p);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double c = cosine_of(s.point(i), s.point(i + 1));
    const double deg = radians_to_degrees(std::acos(std::clamp(c, -1.0, 1.0)));
    ++t.n;
    t.sum_cos += c;
    t.sum_deg += deg;
    if (deg < 80.0) ++t.flat;
    if (deg > 100.0) ++t.sharp;
  }
}

std::vector<double> profile() {
  // Step lengths growing with depth, one short step.
  std::vector<double> l;
  for (int i = 0; i < 12; ++i) l.push_back(1.0 + 0.15 * i);
  l[5] = 0.2;
  return l;
}

void check_binomial(std::size_t count, std::size_t n, double p) {
  const double mean = static_cast<double>(n) * p;
  const double sd = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
  INFO("count " << count << " expected " << mean << " sd " << sd);
  CHECK(std::fabs(static_cast<double>(count) - mean) <= 3.0 * sd + 1.0);
}

}  // namespace

TEST_CASE("unit vectors: dimension one, normalization, isotropy") {
  RandomStream s(1);
  for (int i = 0; i < 100; ++i) {
    const auto v = random_unit_vector(1, s);
    CHECK(std::fabs(v[0]) == 1.0);
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RandomStream r(seed);
    CHECK(std::fabs(norm(random_unit_vector(768, r)) - 1.0) <= 1e-12);
  }
  const std::size_t n = 100000;
  RandomStream r(77);
  std::vector<double> mean(3, 0.0);
  double cos_sum = 0.0;
  std::vector<double> prev = random_unit_vector(3, r);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = random_unit_vector(3, r);
    for (int k = 0; k < 3; ++k) mean[k] += v[k];
    cos_sum += dot(v, prev);
    prev = v;
  }
  const double sigma = std::sqrt(1.0 / 3.0) / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < 3; ++k) CHECK(std::fabs(mean[k] / n) < 4.0 * sigma);
  CHECK(std::fabs(cos_sum / n) < 4.0 * sigma);
}

TEST_CASE("null polylines keep step lengths and start at the origin") {
  const std::vector<double> zeros(6, 0.0);
  RandomStream s(3);
  const Polyline z = synthesize_null(zeros, 5, s);
  for (double v : z.coords()) CHECK(v == 0.0);
  const Polyline zs = synthesize_null_subspace(zeros, 5, s);
  for (double v : zs.coords()) CHECK(v == 0.0);

  const std::vector<double> ones{1.0, 1.0};
  RandomStream a(99), b(99);
  const Polyline pa = synthesize_null(ones, 2, a);
  const Polyline pb = synthesize_null(ones, 2, b);
  CHECK(pa.coords() == pb.coords());
  CHECK(std::fabs(norm(step_vectors(pa).point(0)) - 1.0) <= 1e-12);
  CHECK(std::fabs(norm(step_vectors(pa).point(1)) - 1.0) <= 1e-12);

  const auto lengths = profile();
  for (std::size_t dim : {1u, 2u, 3u, 11u, 12u, 13u, 768u}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      RandomStream r(seed);
      for (const Polyline& p : {synthesize_null(lengths, dim, r), synthesize_null_subspace(lengths, dim, r)}) {
        for (double v : p.point(0)) CHECK(v == 0.0);
        const auto got = step_lengths(p);
        for (std::size_t i = 0; i < lengths.size(); ++i) CHECK(std::fabs(got[i] - lengths[i]) <= 1e-9 * lengths[i]);
      }
    }
  }
}

TEST_CASE("null draws are reproducible and independent of thread count") {
  const TrajectoryBundle b = oracle::random_bundle(9, 13, 40, 12);
  NullConfig n;
  n.samples = 64;
  for (NullMethod m : {NullMethod::kSubspace, NullMethod::kAmbient}) {
    n.method = m;
    const auto seq = null_statistics_bundle(b, AnalysisConfig{}, n, 1);
    const auto par = null_statistics_bundle(b, AnalysisConfig{}, n, 7);
    for (std::size_t t = 0; t < seq.size(); ++t) {
      CHECK(seq[t].c_tilde == par[t].c_tilde);
      CHECK(seq[t].r_tilde == par[t].r_tilde);
      const NullDraws one = null_statistics(b.trajectories[t], AnalysisConfig{}, n, 3);
      CHECK(one.c_tilde == seq[t].c_tilde);
      CHECK(one.r_tilde == seq[t].r_tilde);
      for (auto c : seq[t].c_tilde) CHECK(c <= 11u);
      CHECK(seq[t].samples() == 64);
    }
  }
  n.base_seed = 43;
  n.method = NullMethod::kSubspace;
  const auto other = null_statistics_bundle(b, AnalysisConfig{}, n, 1);
  n.base_seed = 42;
  CHECK(other[0].r_tilde != null_statistics_bundle(b, AnalysisConfig{}, n, 1)[0].r_tilde);
}

TEST_CASE("straight observed trajectory: nulls keep its step lengths") {
  Polyline p(4, 6);
  for (std::size_t i = 0; i < 6; ++i) p.point(i)[0] = static_cast<double>(i * i);
  NullConfig n;
  n.samples = 50;
  const NullDraws d = null_statistics(p, "line", AnalysisConfig{}, n);
  CHECK(d.samples() == 50);
  for (const auto& r : d.r_tilde) CHECK(*r >= 1.0);
  for (std::uint64_t s = 0; s < 5; ++s) {
    RandomStream stream(derive_stream_key(42, "line", s));
    const auto got = step_lengths(synthesize_null_subspace(step_lengths(p), 4, stream));
    const auto want = step_lengths(p);
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::fabs(got[i] - want[i]) <= 1e-9 * want[i]);
  }
}

TEST_CASE("tail frequencies match the analytic cosine tail at low dimension") {
  const auto lengths = profile();
  for (int d : {3, 5, 8, 20}) {
    const double p_flat = oracle::cosine_upper_tail(std::cos(80.0 * std::numbers::pi / 180.0), d);
    for (NullMethod m : {NullMethod::kSubspace, NullMethod::kAmbient}) {
      AngleTally t;
      for (std::uint64_t s = 0; s < 4000; ++s) {
        RandomStream r(derive_stream_key(5, "tail", s));
        tally(m == NullMethod::kSubspace ? synthesize_null_subspace(lengths, d, r) : synthesize_null(lengths, d, r), t);
      }
      INFO("d = " << d << " method " << null_method_name(m));
      check_binomial(t.flat, t.n, p_flat);
      check_binomial(t.sharp, t.n, p_flat);
    }
  }
}

TEST_CASE("768-dimensional nulls: tails vanish, angles centre on 90 degrees, cosines isotropic") {
  const auto lengths = profile();
  const double p_tail = oracle::cosine_upper_tail(std::cos(80.0 * std::numbers::pi / 180.0), 768);
  CHECK(p_tail < 1e-3);
  CHECK(p_tail > 0.0);
  AngleTally t;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    RandomStream r(derive_stream_key(6, "iso", s));
    tally(synthesize_null_subspace(lengths, 768, r), t);
  }
  CHECK(t.n >= 10000);
  check_binomial(t.flat, t.n, p_tail);
  check_binomial(t.sharp, t.n, p_tail);
  CHECK(std::fabs(t.sum_deg / t.n - 90.0) < 0.5);
  CHECK(std::fabs(t.sum_cos / t.n) < 4.0 / std::sqrt(static_cast<double>(t.n)));

  AngleTally t64;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    RandomStream r(derive_stream_key(6, "iso64", s));
    tally(synthesize_null(lengths, 64, r), t64);
  }
  CHECK(std::fabs(t64.sum_deg / t64.n - 90.0) < 0.5);
}

TEST_CASE("mean null ratio agrees with an independent mt19937 reimplementation") {
  const auto lengths = profile();
  Polyline observed(768, lengths.size() + 1);
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    observed.point(i + 1)[0] = observed.point(i)[0] + ((i % 2) ? -lengths[i] : lengths[i]);
  }
  const std::size_t S = 2000;
  auto moments = [](const std::vector<double>& v) {
    double m = 0.0, q = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double x : v) q += (x - m) * (x - m);
    return std::pair{m, std::sqrt(q / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
  };

  std::mt19937_64 gen(2024);
  std::vector<double> ref;
  for (std::size_t s = 0; s < S; ++s) ref.push_back(oracle::loop_summary(oracle::mt_null_polyline(lengths, 768, gen)).ratio);
  const auto [ref_mean, ref_se] = moments(ref);

  for (NullMethod m : {NullMethod::kSubspace, NullMethod::kAmbient}) {
    NullConfig n;
    n.samples = S;
    n.method = m;
    const NullDraws d = null_statistics(observed, "alt", AnalysisConfig{}, n);
    std::vector<double> r;
    for (const auto& x : d.r_tilde) r.push_back(*x);
    const auto [mean, se] = moments(r);
    INFO(null_method_name(m) << " mean " << mean << " reference " << ref_mean);
    CHECK(mean > 1.0);
    CHECK(std::fabs(mean - ref_mean) <= 3.0 * std::hypot(se, ref_se));
  }
}

TEST_CASE("degenerate null chords are carried as markers") {
  // One step: the null chord equals the step, never degenerate; zero steps
  // make every chord degenerate.
  Polyline still(3, 4);
  NullConfig n;
  n.samples = 10;
  const NullDraws d = null_statistics(still, "still", AnalysisConfig{}, n);
  for (const auto& r : d.r_tilde) CHECK_FALSE(r.has_value());
  CHECK_FALSE(d.mean_r().has_value());
  CHECK(d.mean_c() == 0.0);
}

TEST_CASE("config validation") {
  NullConfig n;
  n.samples = 0;
  CHECK_THROWS_AS(n.validate(), std::invalid_argument);
}
