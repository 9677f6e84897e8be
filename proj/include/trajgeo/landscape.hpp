// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "trajgeo/bundle.hpp"
#include "trajgeo/errors.hpp"

namespace trajgeo {

/// Two-component PCA projection: y = basis^T (x - mean).
struct Projection {
  Eigen::VectorXd mean;
  Eigen::Matrix<double, Eigen::Dynamic, 2> basis;  // orthonormal columns
  std::array<double, 2> explained_variance{};      // descending
  double total_variance = 0.0;                     // trace of the covariance

  Eigen::Vector2d project(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd embed(const Eigen::Vector2d& y) const;
  double explained_fraction() const;
};

/// Fits a projection to the rows of `points` (n x d). Covariance uses the
/// n - 1 denominator; each basis vector's largest-magnitude coordinate is
/// made positive. Throws AnalysisError when the centered data has rank < 2.
Projection fit_pca(const Eigen::MatrixXd& points);

/// Stacks all token x layer points of a bundle as rows, trajectories in
/// ascending id order so the fit does not depend on record order.
Eigen::MatrixXd bundle_point_matrix(const TrajectoryBundle& bundle);
Projection fit_pca(const TrajectoryBundle& bundle);

struct TokenPoint {
  std::string trajectory_id;
  std::string token_text;
  Eigen::Vector2d position;
  std::optional<double> theta_rad;
};

/// Positions of every token at one internal layer together with its turning
/// angle there. Layer index i runs over 1..L-1 (points 1..points-2).
struct LandscapeFrame {
  std::size_t layer_index = 0;
  std::vector<TokenPoint> tokens;  // ascending trajectory id
};

std::vector<LandscapeFrame> layer_frames(const TrajectoryBundle& bundle, const AnalysisConfig& cfg,
                                         const Projection& proj);

struct Bounds {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
  double diagonal() const;
};

/// Bounding box of every token position in `frames`, padded by 5% per side;
/// a zero-extent axis is widened to a unit interval around its center.
Bounds frame_bounds(const std::vector<LandscapeFrame>& frames);

/// Row-major resolution x resolution field of turning angles in degrees.
/// Cell (row r, col c) has its center at
/// (min_x + (c + 0.5) w, min_y + (r + 0.5) h).
struct HeatGrid {
  std::size_t resolution = 0;
  Bounds bounds;
  double bandwidth = 0.0;
  std::vector<double> values;

  double at(std::size_t row, std::size_t col) const { return values[row * resolution + col]; }
  Eigen::Vector2d cell_center(std::size_t row, std::size_t col) const;
};

/// Normalized Gaussian-kernel interpolation of (theta_deg - 90) around a
/// neutral 90 degrees; bandwidth = bandwidth_fraction x bounds diagonal.
/// Cells where the summed weight is below 1e-12 are set to 90.
HeatGrid rasterize(const LandscapeFrame& frame, std::size_t resolution, double bandwidth_fraction,
                   const std::optional<Bounds>& bounds = std::nullopt, std::size_t threads = 1);

/// Layer-ordered frame stack plus, per token, its polyline across sheets.
struct FoliationTrack {
  std::string trajectory_id;
  std::string token_text;
  std::vector<std::size_t> layers;
  std::vector<Eigen::Vector2d> positions;
  std::vector<std::optional<double>> theta_rad;
};

struct Foliation {
  std::vector<LandscapeFrame> frames;
  std::vector<FoliationTrack> tracks;  // ascending trajectory id
};

Foliation foliation_export(const TrajectoryBundle& bundle, const AnalysisConfig& cfg,
                           const Projection& proj);

/// Simple SVG: one panel per frame, heat grid colored blue (60 deg) through
/// white (90 deg) to red (120 deg), clamped, with token dots on top.
std::string render_svg(const std::vector<LandscapeFrame>& frames, const std::vector<HeatGrid>& grids);

}  // namespace trajgeo
