// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trajgeo/bundle.hpp"
#include "trajgeo/curvature.hpp"
#include "trajgeo/polyline.hpp"
#include "trajgeo/rng.hpp"

namespace trajgeo {

/// How null step directions are realized.
///
/// kAmbient draws every direction as a normalized Gaussian in R^dim.
/// kSubspace draws the same polyline up to a rotation: the L directions are
/// the normalized columns of the triangular Bartlett factor of a dim x L
/// Gaussian matrix (chi-distributed diagonal, standard-normal upper part),
/// which has the exact joint distribution of the Gram matrix of L
/// independent uniform directions in R^dim. Angles and lengths are therefore
/// identically distributed while each draw costs O(L^2) instead of O(L dim).
enum class NullMethod { kSubspace, kAmbient };

struct NullConfig {
  std::size_t samples = 1000;
  std::uint64_t base_seed = 42;
  NullMethod method = NullMethod::kSubspace;

  void validate() const;
};

/// Per-trajectory null draws. Index s of every vector belongs to sample s.
struct NullDraws {
  std::string trajectory_id;
  std::vector<std::uint32_t> c_tilde;
  std::vector<std::uint32_t> flat_tilde;
  std::vector<std::uint32_t> sharp_tilde;
  std::vector<std::optional<double>> r_tilde;  // nullopt marks a degenerate chord

  std::size_t samples() const { return c_tilde.size(); }
  double mean_c() const;
  double mean_flat() const;
  double mean_sharp() const;
  /// Mean over non-degenerate draws; nullopt when every draw is degenerate.
  std::optional<double> mean_r() const;
};

/// Uniform direction on the (dim-1)-sphere by Gaussian normalization; an
/// all-zero Gaussian draw is redrawn.
std::vector<double> random_unit_vector(std::size_t dim, RandomStream& stream);

/// Null polyline in R^dim starting at the origin whose i-th step has length
/// step_lengths[i] and a uniformly random direction.
Polyline synthesize_null(std::span<const double> step_lengths, std::size_t dim,
                         RandomStream& stream);

/// Same distribution of shape as synthesize_null, embedded in
/// R^min(dim, L) (see NullMethod::kSubspace).
Polyline synthesize_null_subspace(std::span<const double> step_lengths, std::size_t dim,
                                  RandomStream& stream);

std::vector<double> step_lengths(const Polyline& points);

/// S null draws for one trajectory, sample s seeded by
/// derive_stream_key(base_seed, trajectory_id, s).
NullDraws null_statistics(const Polyline& points, const std::string& trajectory_id,
                          const AnalysisConfig& cfg, const NullConfig& ncfg,
                          std::size_t threads = 1);
NullDraws null_statistics(const EmbeddingTrajectory& traj, const AnalysisConfig& cfg,
                          const NullConfig& ncfg, std::size_t threads = 1);

/// Null draws for every trajectory of a bundle, parallel over
/// (trajectory, sample) with bit-identical results for any thread count.
std::vector<NullDraws> null_statistics_bundle(const TrajectoryBundle& bundle,
                                              const AnalysisConfig& cfg, const NullConfig& ncfg,
                                              std::size_t threads = 0);

const char* null_method_name(NullMethod m);

}  // namespace trajgeo
