// SPDX-License-Identifier: Apache-2.0
// Command-line front end: analyze, nulltest, lensing, landscape,
// geometry-check and validate.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "trajgeo/bundle.hpp"
#include "trajgeo/curvature.hpp"
#include "trajgeo/landscape.hpp"
#include "trajgeo/lensing.hpp"
#include "trajgeo/null_model.hpp"
#include "trajgeo/parallel.hpp"
#include "trajgeo/reports.hpp"
#include "trajgeo/statistics.hpp"
#include "trajgeo/toy_geometry.hpp"

namespace {

using namespace trajgeo;

enum ExitCode { kOk = 0, kAnalysisFailure = 1, kUsage = 2, kIo = 3 };

struct Options {
  std::string input, with_path, without_path, base_path, out, render;
  std::size_t samples = 1000;
  std::uint64_t seed = 42;
  double flat_deg = 80.0;
  double sharp_deg = 100.0;
  std::size_t grid = 200;
  double bandwidth = 0.08;
  std::size_t trials = 100;
  std::size_t threads = 0;  // 0: one per hardware thread

  std::size_t workers() const { return threads == 0 ? default_thread_count() : threads; }
};

struct LoadedBundle {
  TrajectoryBundle bundle;
  InputDigest digest;
};

LoadedBundle load(const std::string& role, const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return {load_bundle(bytes), digest_file(role, path, bytes)};
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw IoError("write to '" + path + "' failed");
}

AnalysisConfig analysis_config(const Options& o) {
  AnalysisConfig cfg;
  cfg.flat_threshold_deg = o.flat_deg;
  cfg.sharp_threshold_deg = o.sharp_deg;
  cfg.validate();
  return cfg;
}

Json thresholds_json(const AnalysisConfig& cfg) {
  return Json{{"flat_deg", cfg.flat_threshold_deg},
              {"sharp_deg", cfg.sharp_threshold_deg},
              {"degenerate_eps", cfg.degenerate_eps}};
}

int cmd_analyze(const Options& o) {
  const AnalysisConfig cfg = analysis_config(o);
  const auto in = load("input", o.input);
  const auto summaries = summarize_bundle(in.bundle, cfg, o.workers());
  RunManifest m{"analyze", thresholds_json(cfg), {in.digest}};
  write_text(o.out, format_json(analyze_report(m, in.bundle, summaries)));
  return kOk;
}

int cmd_nulltest(const Options& o) {
  const AnalysisConfig cfg = analysis_config(o);
  NullConfig ncfg;
  ncfg.samples = o.samples;
  ncfg.base_seed = o.seed;
  ncfg.validate();
  const auto in = load("input", o.input);
  const std::size_t threads = o.workers();
  const auto summaries = summarize_bundle(in.bundle, cfg, threads);
  const auto nulls = null_statistics_bundle(in.bundle, cfg, ncfg, threads);
  const PooledReport pooled = pooled_test(summaries, nulls);
  std::optional<PairedReport> paired;
  if (summaries.size() >= 2) paired = paired_test(summaries, nulls);

  Json config = thresholds_json(cfg);
  config["samples"] = ncfg.samples;
  config["seed"] = ncfg.base_seed;
  config["null_method"] = null_method_name(ncfg.method);
  RunManifest m{"nulltest", config, {in.digest}};
  write_text(o.out, format_json(nulltest_report(m, in.bundle, summaries, nulls, ncfg, pooled, paired)));
  return kOk;
}

int cmd_lensing(const Options& o) {
  const AnalysisConfig cfg;
  const auto w = load("with", o.with_path);
  const auto wo = load("without", o.without_path);
  const auto b = load("base", o.base_path);
  const auto triples = align_triples(w.bundle, wo.bundle, b.bundle);
  const auto reports = compare_triples(triples, o.workers(), cfg.degenerate_eps);
  const CohortSummary cohort = summarize_cohort(reports);
  RunManifest m{"lensing", Json{{"degenerate_eps", cfg.degenerate_eps}}, {w.digest, wo.digest, b.digest}};
  write_text(o.out, format_json(lensing_report(m, reports, cohort)));
  return kOk;
}

int cmd_landscape(const Options& o) {
  const AnalysisConfig cfg = analysis_config(o);
  const auto in = load("input", o.input);
  const Projection proj = fit_pca(in.bundle);
  const Foliation fol = foliation_export(in.bundle, cfg, proj);
  const Bounds bounds = frame_bounds(fol.frames);
  std::vector<HeatGrid> grids;
  for (const auto& f : fol.frames) {
    grids.push_back(rasterize(f, o.grid, o.bandwidth, bounds, o.workers()));
  }
  Json config = thresholds_json(cfg);
  config["grid"] = o.grid;
  config["bandwidth"] = o.bandwidth;
  RunManifest m{"landscape", config, {in.digest}};
  write_text(o.out, format_json(landscape_report(m, proj, fol, grids, o.bandwidth)));
  if (!o.render.empty()) write_text(o.render, render_svg(fol.frames, grids));
  return kOk;
}

int cmd_geometry_check(const Options& o) {
  GeometryCheckConfig gc;
  gc.seed = o.seed;
  gc.trials = o.trials;
  const GeometryCheckReport rep = run_geometry_checks(gc);
  RunManifest m{"geometry-check", Json{{"seed", gc.seed}, {"trials", gc.trials}}, {}};
  write_text(o.out, format_json(geometry_report(m, gc, rep)));
  if (rep.passed()) return kOk;
  for (const auto& c : rep.checks) {
    if (!c.passed) {
      std::cerr << "geometry-check: " << c.name << " failed (max " << c.max_value << " > "
                << c.tolerance << ") at trial " << c.worst_trial << ", trial seed " << c.worst_seed
                << "\n";
    }
  }
  return kAnalysisFailure;
}

int cmd_validate(const Options& o) {
  const auto bytes = read_file_bytes(o.input);
  static constexpr char kMagic[] = {'E', 'M', 'T', 'J'};
  if (bytes.size() >= 4 && std::equal(kMagic, kMagic + 4, bytes.begin())) {
    const TrajectoryBundle b = load_bundle(bytes);
    std::cout << "valid bundle: " << b.trajectories.size() << " trajectories, "
              << b.points_per_trajectory << " points, dim " << b.dim << "\n";
    return kOk;
  }
  Json report;
  try {
    report = Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("not a bundle and not a JSON report: ") + e.what());
  }
  const auto problems = check_report_manifest(report);
  if (!problems.empty()) {
    for (const auto& p : problems) std::cerr << "invalid report: " << p << "\n";
    return kAnalysisFailure;
  }
  std::cout << "valid report: " << report["manifest"]["command"].get<std::string>() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Layerwise trajectory curvature analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.add_option("--threads", o.threads, "Worker threads, 0 for one per hardware thread (results do not depend on it)")
      ->capture_default_str();

  auto add_thresholds = [&](CLI::App* c) {
    c->add_option("--flat-deg", o.flat_deg, "Flat-angle threshold in degrees")->capture_default_str();
    c->add_option("--sharp-deg", o.sharp_deg, "Sharp-angle threshold in degrees")->capture_default_str();
  };
  auto add_out = [&](CLI::App* c) { c->add_option("--out", o.out, "Output file (default: stdout)"); };

  auto* analyze = app.add_subcommand("analyze", "Per-trajectory turning angles and length/chord ratios");
  analyze->add_option("--input", o.input, "Trajectory bundle")->required();
  add_out(analyze);
  add_thresholds(analyze);

  auto* nulltest = app.add_subcommand("nulltest", "Pooled and paired tests against the random-direction null");
  nulltest->add_option("--input", o.input, "Trajectory bundle")->required();
  add_out(nulltest);
  nulltest->add_option("--samples", o.samples, "Null samples per trajectory")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  nulltest->add_option("--seed", o.seed, "Root seed")->capture_default_str();
  add_thresholds(nulltest);

  auto* lensing = app.add_subcommand("lensing", "Divergence metrics over (with, without, base) triples");
  lensing->add_option("--with", o.with_path, "Bundle with the disambiguating token")->required();
  lensing->add_option("--without", o.without_path, "Bundle without it")->required();
  lensing->add_option("--base", o.base_path, "Control-edit bundle")->required();
  add_out(lensing);

  auto* landscape = app.add_subcommand("landscape", "Per-layer 2D curvature landscape");
  landscape->add_option("--input", o.input, "Trajectory bundle")->required();
  add_out(landscape);
  landscape->add_option("--grid", o.grid, "Grid resolution")->check(CLI::PositiveNumber)->capture_default_str();
  landscape->add_option("--bandwidth", o.bandwidth, "Kernel bandwidth as a fraction of the plot diagonal")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  landscape->add_option("--render", o.render, "Also write an SVG rendering to this path");
  add_thresholds(landscape);

  auto* geometry = app.add_subcommand("geometry-check", "Identity and gradient checks on random toy layers");
  geometry->add_option("--seed", o.seed, "Root seed")->capture_default_str();
  geometry->add_option("--trials", o.trials, "Random cases")->check(CLI::PositiveNumber)->capture_default_str();
  add_out(geometry);

  auto* validate = app.add_subcommand("validate", "Check a bundle or a report's manifest");
  validate->add_option("--input", o.input, "Bundle or JSON report")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*analyze) return cmd_analyze(o);
    if (*nulltest) return cmd_nulltest(o);
    if (*lensing) return cmd_lensing(o);
    if (*landscape) return cmd_landscape(o);
    if (*geometry) return cmd_geometry_check(o);
    if (*validate) return cmd_validate(o);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kAnalysisFailure;
  } catch (const BundleError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kIo;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kAnalysisFailure;
  } catch (const AnalysisError& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return kAnalysisFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kAnalysisFailure;
  }
  return kUsage;
}
