// SPDX-License-Identifier: Apache-2.0
#include "trajgeo/toy_geometry.hpp"

#include <algorithm>
#include <cmath>

namespace trajgeo {

namespace {

std::string shape(const Eigen::MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_states(const Eigen::MatrixXd& x, const ToyLayer& layer) {
  layer.validate();
  if (x.rows() < 1) throw InputError("token states need at least one row");
  if (x.cols() != layer.d()) {
    throw InputError("token states are " + shape(x) + " but the layer expects d = " +
                     std::to_string(layer.d()));
  }
}

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, RandomStream& rng, double sd) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = sd * rng.normal();
  }
  return m;
}

}  // namespace

void ToyLayer::validate() const {
  const Eigen::Index dd = w_q.rows();
  if (dd < 1 || w_q.cols() < 1 || w_v.cols() < 1) throw InputError("toy layer has an empty weight");
  if (w_k.rows() != dd || w_k.cols() != w_q.cols()) {
    throw InputError("W^K is " + shape(w_k) + ", expected " + shape(w_q));
  }
  if (w_v.rows() != dd) throw InputError("W^V has " + std::to_string(w_v.rows()) + " rows, expected d");
  if (w_o.rows() != w_v.cols() || w_o.cols() != dd) {
    throw InputError("W^O is " + shape(w_o) + ", expected " + std::to_string(w_v.cols()) + "x" +
                     std::to_string(dd));
  }
}

ToyLayer ToyLayer::random(Eigen::Index d, Eigen::Index d_k, Eigen::Index d_v, RandomStream& rng,
                          double scale) {
  const double sd = scale / std::sqrt(static_cast<double>(d));
  ToyLayer l;
  l.w_q = gaussian(d, d_k, rng, sd);
  l.w_k = gaussian(d, d_k, rng, sd);
  l.w_v = gaussian(d, d_v, rng, sd);
  l.w_o = gaussian(d_v, d, rng, sd);
  return l;
}

Eigen::MatrixXd random_states(Eigen::Index n, Eigen::Index d, RandomStream& rng, double scale) {
  return gaussian(n, d, rng, scale);
}

Eigen::MatrixXd effective_metric(const Eigen::MatrixXd& x, const ToyLayer& layer) {
  require_states(x, layer);
  return (x * layer.w_q) * (x * layer.w_k).transpose();
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

Eigen::MatrixXd attention_weights(const Eigen::MatrixXd& x, const ToyLayer& layer) {
  return softmax_rows(effective_metric(x, layer) / std::sqrt(static_cast<double>(layer.d_k())));
}

Eigen::MatrixXd layer_step(const Eigen::MatrixXd& x, const ToyLayer& layer) {
  const Eigen::MatrixXd alpha = attention_weights(x, layer);
  const Eigen::MatrixXd h = alpha * x * layer.w_v;
  return x + h * layer.w_o;
}

Eigen::RowVectorXd Connection::apply(Eigen::Index i, Eigen::Index j, const Eigen::RowVectorXd& v) const {
  return alpha(i, j) * (v * transport);
}

Eigen::MatrixXd Connection::apply(const Eigen::MatrixXd& v) const { return alpha * (v * transport); }

Connection Connection::zero(Eigen::Index n, Eigen::Index d) {
  return {Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(d, d)};
}

Connection connection_at(const Eigen::MatrixXd& x, const ToyLayer& layer) {
  return {attention_weights(x, layer), layer.transport()};
}

double discrete_velocity_identity(const Eigen::MatrixXd& x, const ToyLayer& layer) {
  return discrete_velocity_identity(x, layer, attention_weights(x, layer));
}

double discrete_velocity_identity(const Eigen::MatrixXd& x, const ToyLayer& layer,
                                  const Eigen::MatrixXd& alpha) {
  const Eigen::MatrixXd step = layer_step(x, layer) - x;
  if (alpha.rows() != x.rows() || alpha.cols() != x.rows()) {
    throw InputError("alpha is " + shape(alpha) + ", expected " + std::to_string(x.rows()) +
                     " square");
  }
  const Connection gamma{alpha, layer.transport()};
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(x.cols());
    for (Eigen::Index j = 0; j < x.rows(); ++j) sum += gamma.apply(i, j, x.row(j));
    worst = std::max(worst, (step.row(i) - sum).norm());
  }
  return worst;
}

Eigen::VectorXd geodesic_residual(const Eigen::MatrixXd& x_prev, const Eigen::MatrixXd& x_curr,
                                  const Eigen::MatrixXd& x_next, const ToyLayer& layer_at_curr) {
  if (x_prev.rows() != x_curr.rows() || x_prev.cols() != x_curr.cols() ||
      x_next.rows() != x_curr.rows() || x_next.cols() != x_curr.cols()) {
    throw InputError("geodesic triple shapes differ: " + shape(x_prev) + ", " + shape(x_curr) +
                     ", " + shape(x_next));
  }
  const Connection gamma = connection_at(x_curr, layer_at_curr);
  const Eigen::MatrixXd acc = x_next - 2.0 * x_curr + x_prev;
  const Eigen::MatrixXd r = acc + gamma.apply(x_prev - x_curr);
  return r.rowwise().norm();
}

GeodesicTriple construct_geodesic_triple(const Eigen::MatrixXd& x_curr, const ToyLayer& layer) {
  require_states(x_curr, layer);
  const Connection gamma = connection_at(x_curr, layer);
  const Eigen::Index n = x_curr.rows(), d = x_curr.cols();
  // Row-major vec: block (i, j) of the system is delta_ij I + alpha_ij T^T.
  Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(n * d, n * d);
  const Eigen::MatrixXd tt = gamma.transport.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) sys.block(i * d, j * d, d, d) += gamma.alpha(i, j) * tt;
  }
  Eigen::VectorXd rhs(n * d);
  for (Eigen::Index i = 0; i < n; ++i) rhs.segment(i * d, d) = x_curr.row(i).transpose();
  const Eigen::VectorXd sol = sys.fullPivLu().solve(rhs);
  GeodesicTriple t;
  t.x_prev.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) t.x_prev.row(i) = sol.segment(i * d, d).transpose();
  t.x_curr = x_curr;
  t.x_next = layer_step(x_curr, layer);
  return t;
}

MetricGradient metric_gradient(const Eigen::MatrixXd& x, const ToyLayer& layer) {
  require_states(x, layer);
  const Eigen::Index n = x.rows(), d = x.cols();
  const Eigen::MatrixXd a = layer.w_q * layer.w_k.transpose();
  const Eigen::MatrixXd ax = x * a.transpose();  // row j: (A x_j)^T
  const Eigen::MatrixXd xa = x * a;              // row i: (A^T x_i)^T
  MetricGradient g(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      g.block(i, j, i) += ax.row(j);
      g.block(i, j, j) += xa.row(i);
    }
  }
  return g;
}

MetricGradient metric_gradient_fd(const Eigen::MatrixXd& x, const ToyLayer& layer, double h) {
  require_states(x, layer);
  const Eigen::Index n = x.rows(), d = x.cols();
  MetricGradient g(n, d);
  Eigen::MatrixXd xp = x;
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index c = 0; c < d; ++c) {
      xp(k, c) = x(k, c) + h;
      const Eigen::MatrixXd gp = effective_metric(xp, layer);
      xp(k, c) = x(k, c) - h;
      const Eigen::MatrixXd gm = effective_metric(xp, layer);
      xp(k, c) = x(k, c);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) g.block(i, j, k)(c) = (gp(i, j) - gm(i, j)) / (2.0 * h);
      }
    }
  }
  return g;
}

double semantic_action(const std::vector<Eigen::MatrixXd>& states,
                       const std::vector<Eigen::MatrixXd>& metrics, const std::vector<double>& losses,
                       KineticMode mode) {
  if (states.size() < 2) throw InputError("semantic action needs at least two states");
  const std::size_t layers = states.size() - 1;
  if (metrics.size() != layers || losses.size() != layers) {
    throw InputError("semantic action: " + std::to_string(states.size()) + " states need " +
                     std::to_string(layers) + " metrics and losses, got " +
                     std::to_string(metrics.size()) + " and " + std::to_string(losses.size()));
  }
  const Eigen::Index n = states.front().rows();
  const Eigen::Index d = states.front().cols();
  for (const auto& s : states) {
    if (s.rows() != n || s.cols() != d) throw InputError("semantic action: state shapes differ");
  }
  double action = 0.0;
  for (std::size_t l = 0; l < layers; ++l) {
    if (metrics[l].rows() != n || metrics[l].cols() != n) {
      throw InputError("semantic action: metric " + std::to_string(l) + " is " + shape(metrics[l]));
    }
    const Eigen::MatrixXd dx = states[l + 1] - states[l];
    double kinetic = 0.0;
    if (mode == KineticMode::kDiagonal) {
      for (Eigen::Index t = 0; t < n; ++t) kinetic += metrics[l](t, t) * dx.row(t).squaredNorm();
    } else {
      const Eigen::MatrixXd gram = dx * dx.transpose();
      kinetic = metrics[l].cwiseProduct(gram).sum();
    }
    action += kinetic - losses[l];
  }
  return action;
}

Eigen::MatrixXd forced_geodesic_step(const Eigen::MatrixXd& x_curr, const Eigen::MatrixXd& x_prev,
                                     const ConnectionApply& gamma, const Eigen::MatrixXd& grad_loss,
                                     const Eigen::MatrixXd& preconditioner, double lambda) {
  if (!(lambda >= 0.0)) throw InputError("forced geodesic step: lambda must be >= 0");
  const Eigen::Index n = x_curr.rows(), d = x_curr.cols();
  if (x_prev.rows() != n || x_prev.cols() != d || grad_loss.rows() != n || grad_loss.cols() != d) {
    throw InputError("forced geodesic step: state and gradient shapes differ");
  }
  if (preconditioner.rows() != n || preconditioner.cols() != n) {
    throw InputError("forced geodesic step: preconditioner is " + shape(preconditioner) +
                     ", expected " + std::to_string(n) + " square");
  }
  const Eigen::MatrixXd v = x_curr - x_prev;
  const Eigen::MatrixXd bend = gamma(v);
  if (bend.rows() != n || bend.cols() != d) throw InputError("connection term has the wrong shape");
  const Eigen::MatrixXd force = preconditioner * grad_loss;
  return 2.0 * x_curr - x_prev - bend - lambda * force;
}

bool GeometryCheckReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const GeometryCheck& c) { return c.passed; });
}

std::uint64_t geometry_trial_seed(std::uint64_t seed, std::size_t trial) {
  return derive_stream_key(seed, "geometry-check", trial);
}

GeometryCheckReport run_geometry_checks(const GeometryCheckConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("geometry check needs at least one trial");
  GeometryCheckReport rep;
  rep.checks = {
      {"attention_row_sum", 1e-12},       {"velocity_identity", 1e-9},
      {"metric_gradient_rel_error", 1e-6}, {"kinetic_reduction", 1e-12},
      {"forced_step_linear", 0.0},         {"geodesic_constructed", 1e-9},
  };
  auto record = [&](std::size_t idx, double value, std::size_t trial, std::uint64_t seed) {
    auto& c = rep.checks[idx];
    if (std::isnan(c.max_value)) return;
    if (trial == 0 || std::isnan(value) || value > c.max_value) {
      c.max_value = value;
      c.worst_trial = trial;
      c.worst_seed = seed;
    }
  };

  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t seed = geometry_trial_seed(cfg.seed, trial);
    RandomStream rng(seed);
    const auto n = static_cast<Eigen::Index>(1 + rng.next_u64() % 8);
    const auto d = static_cast<Eigen::Index>(2 + rng.next_u64() % 15);
    const auto d_k = static_cast<Eigen::Index>(1 + rng.next_u64() % static_cast<std::uint64_t>(d));
    const auto d_v = static_cast<Eigen::Index>(1 + rng.next_u64() % static_cast<std::uint64_t>(d));
    const ToyLayer layer = ToyLayer::random(d, d_k, d_v, rng, 0.5);
    const Eigen::MatrixXd x = random_states(n, d, rng);

    // Row sums, on the layer's own logits and on logits of magnitude up to 1e3.
    const Eigen::MatrixXd logits =
        effective_metric(x, layer) / std::sqrt(static_cast<double>(layer.d_k()));
    Eigen::MatrixXd wide(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) wide(i, j) = 1e3 * (2.0 * rng.uniform_open() - 1.0);
    }
    double row_err = 0.0;
    for (const Eigen::MatrixXd* l : {&logits, static_cast<const Eigen::MatrixXd*>(&wide)}) {
      const Eigen::MatrixXd a = cfg.softmax(*l);
      for (Eigen::Index i = 0; i < n; ++i) row_err = std::max(row_err, std::fabs(a.row(i).sum() - 1.0));
    }
    record(0, row_err, trial, seed);

    record(1, discrete_velocity_identity(x, layer), trial, seed);

    const MetricGradient ga = metric_gradient(x, layer);
    const MetricGradient gf = metric_gradient_fd(x, layer);
    double diff = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
          diff = std::max(diff, (ga.block(i, j, k) - gf.block(i, j, k)).cwiseAbs().maxCoeff());
        }
      }
    }
    record(2, diff / std::max(ga.max_abs(), 1e-300), trial, seed);

    std::vector<Eigen::MatrixXd> states{x};
    for (int l = 0; l < 3; ++l) states.push_back(layer_step(states.back(), layer));
    const std::vector<Eigen::MatrixXd> id_metrics(3, Eigen::MatrixXd::Identity(n, n));
    const double action = semantic_action(states, id_metrics, {0.0, 0.0, 0.0});
    double kinetic = 0.0;
    for (int l = 0; l < 3; ++l) kinetic += (states[l + 1] - states[l]).squaredNorm();
    record(3, std::fabs(action - kinetic) / std::max(1.0, std::fabs(kinetic)), trial, seed);

    const Eigen::MatrixXd x_prev = random_states(n, d, rng);
    const Eigen::MatrixXd grad = random_states(n, d, rng);
    const Connection none = Connection::zero(n, d);
    const Eigen::MatrixXd next =
        forced_geodesic_step(x, x_prev, [&](const Eigen::MatrixXd& v) { return none.apply(v); },
                             grad, Eigen::MatrixXd::Identity(n, n), 0.0);
    record(4, (next - (2.0 * x - x_prev)).cwiseAbs().maxCoeff(), trial, seed);

    const GeodesicTriple tri = construct_geodesic_triple(x, layer);
    record(5, geodesic_residual(tri.x_prev, tri.x_curr, tri.x_next, layer).maxCoeff(), trial, seed);
  }
  for (auto& c : rep.checks) c.passed = c.max_value <= c.tolerance;
  return rep;
}

}  // namespace trajgeo
