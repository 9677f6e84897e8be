// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajgeo/curvature.hpp"
#include "trajgeo/landscape.hpp"
#include "trajgeo/lensing.hpp"
#include "trajgeo/null_model.hpp"
#include "trajgeo/statistics.hpp"
#include "trajgeo/toy_geometry.hpp"

namespace trajgeo {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "trajgeo";
inline constexpr const char* kToolVersion = "0.1.0";

/// Deterministic JSON text: keys in insertion order, two-space indent, every
/// floating-point number printed with 17 significant digits, non-finite
/// numbers as null. Ends with a newline.
std::string format_json(const Json& value);

std::string sha256_hex(std::span<const std::uint8_t> bytes);

struct InputDigest {
  std::string role;
  std::string file;  // basename only, so reports do not depend on the working directory
  std::string sha256;
};

InputDigest digest_file(const std::string& role, const std::string& path,
                        std::span<const std::uint8_t> bytes);

struct RunManifest {
  std::string command;
  Json config = Json::object();
  std::vector<InputDigest> inputs;

  Json to_json() const;
};

/// Problems that make `report` unusable as a self-describing report; empty
/// when it carries a complete manifest.
std::vector<std::string> check_report_manifest(const Json& report);

Json opt(const std::optional<double>& v);

Json analyze_report(const RunManifest& manifest, const TrajectoryBundle& bundle,
                    const std::vector<CurvatureSummary>& summaries);

Json nulltest_report(const RunManifest& manifest, const TrajectoryBundle& bundle,
                     const std::vector<CurvatureSummary>& summaries,
                     const std::vector<NullDraws>& nulls, const NullConfig& ncfg,
                     const PooledReport& pooled, const std::optional<PairedReport>& paired);

Json lensing_report(const RunManifest& manifest, const std::vector<DivergenceReport>& reports,
                    const CohortSummary& cohort);

Json landscape_report(const RunManifest& manifest, const Projection& proj, const Foliation& foliation,
                      const std::vector<HeatGrid>& grids, double bandwidth_fraction);

Json geometry_report(const RunManifest& manifest, const GeometryCheckConfig& cfg,
                     const GeometryCheckReport& report);

}  // namespace trajgeo
