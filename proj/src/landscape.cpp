// SPDX-License-Identifier: Apache-2.0
#include "trajgeo/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "trajgeo/curvature.hpp"
#include "trajgeo/parallel.hpp"

namespace trajgeo {

namespace {

constexpr double kRankTolerance = 1e-12;

std::vector<std::size_t> id_order(const TrajectoryBundle& bundle) {
  std::vector<std::size_t> order(bundle.trajectories.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return bundle.trajectories[a].id < bundle.trajectories[b].id;
  });
  return order;
}

}  // namespace

Eigen::Vector2d Projection::project(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return basis.transpose() * (x - mean);
}

Eigen::VectorXd Projection::embed(const Eigen::Vector2d& y) const { return mean + basis * y; }

double Projection::explained_fraction() const {
  if (total_variance <= 0.0) return 0.0;
  return (explained_variance[0] + explained_variance[1]) / total_variance;
}

Projection fit_pca(const Eigen::MatrixXd& points) {
  const auto n = points.rows();
  const auto d = points.cols();
  if (n < 3) throw AnalysisError("PCA needs at least 3 points, got " + std::to_string(n));
  if (d < 2) throw AnalysisError("PCA needs dimension >= 2, got " + std::to_string(d));

  Projection proj;
  proj.mean = points.colwise().mean().transpose();
  const Eigen::MatrixXd centered = points.rowwise() - proj.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw AnalysisError("covariance eigensolver failed");
  const Eigen::VectorXd& evals = solver.eigenvalues();  // ascending
  const double l1 = std::max(0.0, evals(d - 1));
  const double l2 = std::max(0.0, evals(d - 2));
  if (l1 <= 0.0) throw AnalysisError("PCA rank deficiency: centered data has rank 0");
  if (l2 <= kRankTolerance * l1) {
    throw AnalysisError("PCA rank deficiency: centered data has rank 1 (second eigenvalue " +
                        std::to_string(l2) + ")");
  }
  proj.explained_variance = {l1, l2};
  proj.total_variance = cov.trace();
  proj.basis.resize(d, 2);
  proj.basis.col(0) = solver.eigenvectors().col(d - 1);
  proj.basis.col(1) = solver.eigenvectors().col(d - 2);
  for (int c = 0; c < 2; ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double a = std::fabs(proj.basis(k, c));
      if (a > best) {
        best = a;
        arg = k;
      }
    }
    if (proj.basis(arg, c) < 0.0) proj.basis.col(c) *= -1.0;
  }
  return proj;
}

Eigen::MatrixXd bundle_point_matrix(const TrajectoryBundle& bundle) {
  const std::size_t P = bundle.points_per_trajectory;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(bundle.trajectories.size() * P),
                    static_cast<Eigen::Index>(bundle.dim));
  Eigen::Index row = 0;
  for (std::size_t t : id_order(bundle)) {
    const auto& traj = bundle.trajectories[t];
    for (std::size_t i = 0; i < P; ++i, ++row) {
      auto p = traj.point(i);
      for (std::size_t k = 0; k < bundle.dim; ++k) m(row, static_cast<Eigen::Index>(k)) = p[k];
    }
  }
  return m;
}

Projection fit_pca(const TrajectoryBundle& bundle) { return fit_pca(bundle_point_matrix(bundle)); }

std::vector<LandscapeFrame> layer_frames(const TrajectoryBundle& bundle, const AnalysisConfig& cfg,
                                         const Projection& proj) {
  cfg.validate();
  const std::size_t P = bundle.points_per_trajectory;
  std::vector<LandscapeFrame> frames;
  if (P < 3) return frames;
  frames.resize(P - 2);
  for (std::size_t f = 0; f < frames.size(); ++f) frames[f].layer_index = f + 1;

  for (std::size_t t : id_order(bundle)) {
    const auto& traj = bundle.trajectories[t];
    const Polyline line = traj.to_polyline();
    const AngleSeries angles = turning_angles(step_vectors(line), cfg.degenerate_eps);
    for (std::size_t f = 0; f < frames.size(); ++f) {
      auto p = line.point(f + 1);
      const Eigen::Map<const Eigen::VectorXd> x(p.data(), static_cast<Eigen::Index>(p.size()));
      frames[f].tokens.push_back({traj.id, traj.token_text, proj.project(x), angles.values[f]});
    }
  }
  return frames;
}

double Bounds::diagonal() const { return std::hypot(max_x - min_x, max_y - min_y); }

Bounds frame_bounds(const std::vector<LandscapeFrame>& frames) {
  Bounds b{HUGE_VAL, HUGE_VAL, -HUGE_VAL, -HUGE_VAL};
  bool any = false;
  for (const auto& f : frames) {
    for (const auto& tp : f.tokens) {
      any = true;
      b.min_x = std::min(b.min_x, tp.position.x());
      b.max_x = std::max(b.max_x, tp.position.x());
      b.min_y = std::min(b.min_y, tp.position.y());
      b.max_y = std::max(b.max_y, tp.position.y());
    }
  }
  if (!any) return Bounds{-0.5, -0.5, 0.5, 0.5};
  auto widen = [](double& lo, double& hi) {
    const double extent = hi - lo;
    if (extent <= 0.0) {
      const double c = 0.5 * (lo + hi);
      lo = c - 0.5;
      hi = c + 0.5;
    } else {
      lo -= 0.05 * extent;
      hi += 0.05 * extent;
    }
  };
  widen(b.min_x, b.max_x);
  widen(b.min_y, b.max_y);
  return b;
}

Eigen::Vector2d HeatGrid::cell_center(std::size_t row, std::size_t col) const {
  const double w = (bounds.max_x - bounds.min_x) / static_cast<double>(resolution);
  const double h = (bounds.max_y - bounds.min_y) / static_cast<double>(resolution);
  return {bounds.min_x + (static_cast<double>(col) + 0.5) * w,
          bounds.min_y + (static_cast<double>(row) + 0.5) * h};
}

HeatGrid rasterize(const LandscapeFrame& frame, std::size_t resolution, double bandwidth_fraction,
                   const std::optional<Bounds>& bounds, std::size_t threads) {
  if (resolution < 1) throw std::invalid_argument("rasterize: resolution must be >= 1");
  if (!(bandwidth_fraction > 0.0) || !std::isfinite(bandwidth_fraction)) {
    throw std::invalid_argument("rasterize: bandwidth fraction must be positive");
  }
  std::vector<std::pair<Eigen::Vector2d, double>> sources;
  for (const auto& tp : frame.tokens) {
    if (tp.theta_rad) sources.emplace_back(tp.position, radians_to_degrees(*tp.theta_rad) - 90.0);
  }
  if (sources.empty()) {
    throw AnalysisError("rasterize: layer " + std::to_string(frame.layer_index) +
                        " has no defined turning angle");
  }
  HeatGrid grid;
  grid.resolution = resolution;
  grid.bounds = bounds ? *bounds : frame_bounds({frame});
  grid.bandwidth = bandwidth_fraction * grid.bounds.diagonal();
  grid.values.assign(resolution * resolution, 90.0);
  const double inv_two_h2 = 1.0 / (2.0 * grid.bandwidth * grid.bandwidth);

  parallel_for(resolution, threads, [&](std::size_t row) {
    for (std::size_t col = 0; col < resolution; ++col) {
      const Eigen::Vector2d c = grid.cell_center(row, col);
      double wsum = 0.0, acc = 0.0;
      for (const auto& [pos, dev] : sources) {
        const double w = std::exp(-(c - pos).squaredNorm() * inv_two_h2);
        wsum += w;
        acc += w * dev;
      }
      if (wsum >= 1e-12) grid.values[row * resolution + col] = 90.0 + acc / wsum;
    }
  });
  return grid;
}

Foliation foliation_export(const TrajectoryBundle& bundle, const AnalysisConfig& cfg,
                           const Projection& proj) {
  Foliation out;
  out.frames = layer_frames(bundle, cfg, proj);
  if (out.frames.empty()) return out;
  const std::size_t tokens = out.frames.front().tokens.size();
  out.tracks.resize(tokens);
  for (std::size_t k = 0; k < tokens; ++k) {
    auto& track = out.tracks[k];
    track.trajectory_id = out.frames.front().tokens[k].trajectory_id;
    track.token_text = out.frames.front().tokens[k].token_text;
    for (const auto& f : out.frames) {
      track.layers.push_back(f.layer_index);
      track.positions.push_back(f.tokens[k].position);
      track.theta_rad.push_back(f.tokens[k].theta_rad);
    }
  }
  return out;
}

namespace {

std::string heat_color(double deg) {
  const double t = std::clamp((deg - 60.0) / 60.0, 0.0, 1.0);  // 0 blue, 0.5 white, 1 red
  int r, g, b;
  if (t < 0.5) {
    const double s = t / 0.5;
    r = static_cast<int>(std::lround(255 * s));
    g = static_cast<int>(std::lround(255 * s));
    b = 255;
  } else {
    const double s = (1.0 - t) / 0.5;
    r = 255;
    g = static_cast<int>(std::lround(255 * s));
    b = static_cast<int>(std::lround(255 * s));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const std::vector<LandscapeFrame>& frames, const std::vector<HeatGrid>& grids) {
  constexpr int kPanel = 300;
  constexpr int kGap = 20;
  constexpr std::size_t kMaxCells = 60;
  const std::size_t cols = std::min<std::size_t>(3, std::max<std::size_t>(1, frames.size()));
  const std::size_t rows = (frames.size() + cols - 1) / cols;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << cols * (kPanel + kGap) + kGap << "\" height=\"" << rows * (kPanel + kGap + 20) + kGap
      << "\">\n";
  for (std::size_t f = 0; f < frames.size() && f < grids.size(); ++f) {
    const auto& grid = grids[f];
    const int ox = static_cast<int>(kGap + (f % cols) * (kPanel + kGap));
    const int oy = static_cast<int>(kGap + 20 + (f / cols) * (kPanel + kGap + 20));
    svg << "<g>\n<text x=\"" << ox << "\" y=\"" << oy - 5 << "\" font-size=\"12\">layer "
        << frames[f].layer_index << "</text>\n";
    const std::size_t stride = (grid.resolution + kMaxCells - 1) / kMaxCells;
    const std::size_t cells = (grid.resolution + stride - 1) / stride;
    const double cell = static_cast<double>(kPanel) / static_cast<double>(cells);
    for (std::size_t r = 0; r < cells; ++r) {
      for (std::size_t c = 0; c < cells; ++c) {
        const double v = grid.at(std::min(r * stride, grid.resolution - 1),
                                 std::min(c * stride, grid.resolution - 1));
        // SVG y grows downward; row 0 is the bottom of the plot.
        svg << "<rect x=\"" << ox + c * cell << "\" y=\"" << oy + kPanel - (r + 1) * cell
            << "\" width=\"" << cell + 0.5 << "\" height=\"" << cell + 0.5 << "\" fill=\""
            << heat_color(v) << "\"/>\n";
      }
    }
    const auto& b = grid.bounds;
    for (const auto& tp : frames[f].tokens) {
      const double px = ox + (tp.position.x() - b.min_x) / (b.max_x - b.min_x) * kPanel;
      const double py = oy + kPanel - (tp.position.y() - b.min_y) / (b.max_y - b.min_y) * kPanel;
      svg << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"2\" fill=\"black\"><title>"
          << xml_escape(tp.token_text) << "</title></circle>\n";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace trajgeo
