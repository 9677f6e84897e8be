// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "trajgeo/lensing.hpp"

using namespace trajgeo;
using std::numbers::pi;

namespace {

Polyline poly2(std::vector<double> c) { return Polyline(2, std::move(c)); }

Polyline random_polyline(std::size_t points, std::size_t dim, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Polyline p(dim, points);
  for (std::size_t i = 0; i < points; ++i) {
    for (auto& v : p.point(i)) v = nd(gen) + 0.3 * static_cast<double>(i);
  }
  return p;
}

Polyline transform(const Polyline& p, const Eigen::MatrixXd& q, const Eigen::VectorXd& shift) {
  const auto d = static_cast<Eigen::Index>(p.dim());
  Polyline out(p.dim(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Eigen::Map<const Eigen::VectorXd> x(p.point(i).data(), d);
    const Eigen::VectorXd y = q * x + shift;
    std::copy(y.data(), y.data() + d, out.point(i).begin());
  }
  return out;
}

void check_metrics_equal(const PairMetrics& a, const PairMetrics& b, double tol) {
  REQUIRE(a.d_final.has_value() == b.d_final.has_value());
  if (a.d_final) CHECK(std::fabs(*a.d_final - *b.d_final) <= tol);
  CHECK(std::fabs(a.d_layer - b.d_layer) <= tol);
  REQUIRE(a.delta_curv.value.has_value() == b.delta_curv.value.has_value());
  if (a.delta_curv.value) CHECK(std::fabs(*a.delta_curv.value - *b.delta_curv.value) <= tol);
  REQUIRE(a.delta_theta.value.has_value() == b.delta_theta.value.has_value());
  if (a.delta_theta.value) CHECK(std::fabs(*a.delta_theta.value - *b.delta_theta.value) <= tol);
}

DivergenceReport report_with_layer(std::array<double, 3> v) {
  DivergenceReport r;
  r.triple_id = "x";
  for (std::size_t p = 0; p < 3; ++p) {
    r.pairs[p].d_final = v[p];
    r.pairs[p].d_layer = v[p];
    r.pairs[p].delta_curv.value = v[p];
    r.pairs[p].delta_theta.value = v[p];
  }
  return r;
}

}  // namespace

TEST_CASE("final separation") {
  CHECK(*final_separation(poly2({0, 0, 1, 0}), poly2({0, 0, 1, 0})) == 0.0);
  CHECK(*final_separation(poly2({0, 0, 1, 0}), poly2({0, 0, 0, 1})) == 1.0);
  CHECK(*final_separation(poly2({0, 0, 3, 0}), poly2({0, 0, -2, 0})) == 2.0);
  CHECK_FALSE(final_separation(poly2({1, 1, 0, 0}), poly2({0, 0, 1, 0})).has_value());
  CHECK_THROWS_AS(final_separation(poly2({0, 0, 1, 0}), poly2({0, 0, 1, 0, 2, 0})), InputError);
}

TEST_CASE("layer separation of a constant offset is the offset") {
  std::mt19937_64 gen(1);
  const Polyline a = random_polyline(13, 8, gen);
  std::vector<double> c = a.coords();
  for (std::size_t i = 0; i < a.size(); ++i) c[i * 8 + 3] += 0.75;
  CHECK(std::fabs(layer_separation(a, Polyline(8, c)) - 0.75) <= 1e-12);
  CHECK(layer_separation(a, a) == 0.0);
}

TEST_CASE("curvature divergence") {
  // Bends in opposite directions: second differences antiparallel.
  const MeanWithCount opp = curvature_divergence(poly2({0, 0, 1, 0, 2, 1}), poly2({0, 0, 1, 0, 2, -1}));
  CHECK(*opp.value == 2.0);
  CHECK(opp.included == 1);
  const MeanWithCount same = curvature_divergence(poly2({0, 0, 1, 0, 2, 1}), poly2({0, 0, 2, 0, 4, 2}));
  CHECK(*same.value == 0.0);
  // Straight lines have zero second differences: nothing to compare.
  const MeanWithCount none = curvature_divergence(poly2({0, 0, 1, 0, 2, 0}), poly2({0, 0, 1, 0, 2, 1}));
  CHECK_FALSE(none.value.has_value());
  CHECK(none.included == 0);
  CHECK(none.total == 1);
}

TEST_CASE("turning-angle gap") {
  const Polyline straight = poly2({0, 0, 1, 0, 2, 0, 3, 0, 4, 0});
  const Polyline square = poly2({0, 0, 1, 0, 1, 1, 0, 1, 0, 0});
  CHECK(turning_angle_gap(straight, straight).value == 0.0);
  CHECK(std::fabs(*turning_angle_gap(straight, square).value - pi / 2) <= 1e-12);
  const MeanWithCount still = turning_angle_gap(straight, poly2(std::vector<double>(10, 1.0)));
  CHECK_FALSE(still.value.has_value());
}

TEST_CASE("identical triple gives twelve zeros; substitution base = with") {
  std::mt19937_64 gen(2);
  const Polyline a = random_polyline(13, 16, gen);
  const DivergenceReport same = compare_triple({"s", a, a, a});
  for (Pairing p : kPairings) {
    for (DivergenceMetric m : kDivergenceMetrics) CHECK(*same.value(p, m) == 0.0);
  }
  const Polyline b = random_polyline(13, 16, gen);
  const DivergenceReport sub = compare_triple({"t", a, b, a});
  for (DivergenceMetric m : kDivergenceMetrics) {
    CHECK(*sub.value(Pairing::kWithVsBase, m) == 0.0);
    CHECK(std::fabs(*sub.value(Pairing::kWithVsWithout, m) - *sub.value(Pairing::kWithoutVsBase, m)) <= 1e-12);
  }
}

TEST_CASE("symmetry, bounds and rigid-motion invariance") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t d = 24;
    const Polyline a = random_polyline(13, d, gen);
    const Polyline b = random_polyline(13, d, gen);
    const PairMetrics ab = compare_pair(a, b);
    check_metrics_equal(ab, compare_pair(b, a), 1e-12);
    CHECK(*ab.d_final >= 0.0);
    CHECK(*ab.d_final <= 2.0);
    CHECK(*ab.delta_curv.value >= 0.0);
    CHECK(*ab.delta_curv.value <= 2.0);
    CHECK(*ab.delta_theta.value >= 0.0);
    CHECK(*ab.delta_theta.value <= pi);

    Eigen::MatrixXd g(d, d);
    for (std::size_t i = 0; i < d * d; ++i) g.data()[i] = nd(gen);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    Eigen::VectorXd shift(d);
    for (std::size_t k = 0; k < d; ++k) shift(static_cast<Eigen::Index>(k)) = 5.0 * nd(gen);

    const PairMetrics moved = compare_pair(transform(a, q, shift), transform(b, q, shift));
    CHECK(std::fabs(moved.d_layer - ab.d_layer) <= 1e-9);
    CHECK(std::fabs(*moved.delta_curv.value - *ab.delta_curv.value) <= 1e-9);
    CHECK(std::fabs(*moved.delta_theta.value - *ab.delta_theta.value) <= 1e-9);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
    const PairMetrics rotated = compare_pair(transform(a, q, zero), transform(b, q, zero));
    CHECK(std::fabs(*rotated.d_final - *ab.d_final) <= 1e-9);
  }
}

TEST_CASE("cohort summary") {
  const CohortSummary one = summarize_cohort({report_with_layer({3, 2, 1})});
  const CohortStat& s = *one.at(Pairing::kWithVsWithout, DivergenceMetric::kDLayer);
  CHECK(s.n == 1);
  CHECK_FALSE(s.sd.has_value());
  CHECK(s.min == 3.0);
  CHECK(s.q1 == 3.0);
  CHECK(s.median == 3.0);
  CHECK(s.q3 == 3.0);
  CHECK(s.max == 3.0);
  CHECK(s.mean == 3.0);
  CHECK(one.ordering_holds());

  const CohortSummary same = summarize_cohort(std::vector<DivergenceReport>(5, report_with_layer({1, 1, 1})));
  CHECK(*same.at(Pairing::kWithVsBase, DivergenceMetric::kDFinal)->sd == 0.0);
  CHECK_FALSE(same.ordering_holds());

  std::vector<DivergenceReport> four;
  for (double v : {4.0, 1.0, 3.0, 2.0}) four.push_back(report_with_layer({v, v, 0}));
  const CohortStat& q = *summarize_cohort(four).at(Pairing::kWithVsWithout, DivergenceMetric::kDeltaTheta);
  CHECK(q.q1 == 1.75);
  CHECK(q.median == 2.5);
  CHECK(q.q3 == 3.25);
  CHECK(std::fabs(*q.sd - std::sqrt(5.0 / 3.0)) <= 1e-15);

  // One metric failing the ordering fails the whole check.
  DivergenceReport mixed = report_with_layer({3, 2, 1});
  mixed.pairs[0].delta_curv.value = 0.5;
  const CohortSummary m = summarize_cohort({mixed});
  CHECK_FALSE(m.ordering_holds(DivergenceMetric::kDeltaCurv));
  CHECK(m.ordering_holds(DivergenceMetric::kDLayer));
  CHECK_FALSE(m.ordering_holds());

  // Degenerate entries are counted, not averaged.
  DivergenceReport hole = report_with_layer({1, 1, 1});
  hole.pairs[2].delta_theta.value.reset();
  const auto& hs = summarize_cohort({hole, report_with_layer({1, 1, 5})}).at(Pairing::kWithVsBase, DivergenceMetric::kDeltaTheta);
  CHECK(hs->n == 1);
  CHECK(hs->excluded == 1);
  CHECK(hs->mean == 5.0);

  CHECK_THROWS_AS(summarize_cohort({}), InputError);
}

TEST_CASE("triple alignment by id") {
  const TrajectoryBundle w = oracle::random_bundle(4, 5, 3, 1);
  TrajectoryBundle o = oracle::random_bundle(4, 5, 3, 2);
  TrajectoryBundle b = oracle::random_bundle(4, 5, 3, 3);
  std::reverse(o.trajectories.begin(), o.trajectories.end());
  const auto triples = align_triples(w, o, b);
  REQUIRE(triples.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(triples[i].triple_id == w.trajectories[i].id);
    CHECK(triples[i].without_traj.coords() == o.trajectories[3 - i].to_polyline().coords());
  }

  TrajectoryBundle missing = b;
  missing.trajectories.erase(missing.trajectories.begin() + 1);
  missing.trajectories[0].id = "stray";
  try {
    align_triples(w, o, missing);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("traj_0") != std::string::npos);
    CHECK(msg.find("traj_1") != std::string::npos);
    CHECK(msg.find("stray") != std::string::npos);
    CHECK(msg.find("traj_2") == std::string::npos);
  }
  CHECK_THROWS_AS(align_triples(w, o, oracle::random_bundle(4, 6, 3, 3)), InputError);

  const auto seq = compare_triples(triples, 1);
  const auto par = compare_triples(triples, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (Pairing p : kPairings) {
      for (DivergenceMetric m : kDivergenceMetrics) CHECK(seq[i].value(p, m) == par[i].value(p, m));
    }
  }
}
