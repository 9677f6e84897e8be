// SPDX-License-Identifier: Apache-2.0
#include "trajgeo/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include <openssl/evp.h>

namespace trajgeo {

namespace {

void write_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

bool is_primitive(const Json& v) { return !v.is_object() && !v.is_array(); }

void write_value(std::string& out, const Json& v, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, val] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += inner;
        out += Json(key).dump();
        out += ": ";
        write_value(out, val, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(v.begin(), v.end(), is_primitive);
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          write_value(out, v[i], indent + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        write_value(out, v[i], indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float:
      write_number(out, v.get<double>());
      return;
    default:
      out += v.dump();
  }
}

Json paired_json(const PairedTest& t) {
  return Json{{"available", t.available}, {"n", t.n},          {"dof", t.dof},
              {"d_bar", opt(t.d_bar)},    {"sd", opt(t.sd)},    {"t", opt(t.t)},
              {"p", opt(t.p)},            {"degenerate_variance", t.degenerate_variance}};
}

Json unavailable_paired() {
  PairedTest t;
  return paired_json(t);
}

Json theta_degrees(const AngleSeries& a) {
  Json arr = Json::array();
  for (const auto& v : a.values) arr.push_back(v ? Json(radians_to_degrees(*v)) : Json(nullptr));
  return arr;
}

Json cohort_stat_json(const std::optional<CohortStat>& s) {
  if (!s) return Json{{"n", 0}};
  return Json{{"n", s->n},        {"excluded", s->excluded}, {"mean", s->mean},
              {"sd", opt(s->sd)}, {"min", s->min},           {"q1", s->q1},
              {"median", s->median}, {"q3", s->q3},         {"max", s->max}};
}

Json pair_json(const PairMetrics& m) {
  return Json{{"d_final", opt(m.d_final)},
              {"d_layer", m.d_layer},
              {"delta_curv", opt(m.delta_curv.value)},
              {"delta_curv_terms", m.delta_curv.included},
              {"delta_theta_rad", opt(m.delta_theta.value)},
              {"delta_theta_terms", m.delta_theta.included}};
}

Json bounds_json(const Bounds& b) {
  return Json{{"min_x", b.min_x}, {"min_y", b.min_y}, {"max_x", b.max_x}, {"max_y", b.max_y}};
}

}  // namespace

std::string format_json(const Json& value) {
  std::string out;
  write_value(out, value, 0);
  out += "\n";
  return out;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 15];
  }
  return hex;
}

InputDigest digest_file(const std::string& role, const std::string& path,
                        std::span<const std::uint8_t> bytes) {
  return {role, std::filesystem::path(path).filename().string(), sha256_hex(bytes)};
}

Json RunManifest::to_json() const {
  Json in = Json::array();
  for (const auto& d : inputs) in.push_back({{"role", d.role}, {"file", d.file}, {"sha256", d.sha256}});
  return Json{{"tool", kToolName}, {"version", kToolVersion}, {"command", command},
              {"config", config},  {"inputs", in}};
}

std::vector<std::string> check_report_manifest(const Json& report) {
  std::vector<std::string> problems;
  if (!report.is_object()) return {"report is not a JSON object"};
  if (!report.contains("manifest") || !report["manifest"].is_object()) {
    return {"report has no manifest object"};
  }
  const Json& m = report["manifest"];
  for (const char* key : {"tool", "version", "command"}) {
    if (!m.contains(key) || !m[key].is_string() || m[key].get<std::string>().empty()) {
      problems.push_back(std::string("manifest.") + key + " is missing or not a non-empty string");
    }
  }
  if (!m.contains("config") || !m["config"].is_object()) {
    problems.push_back("manifest.config is missing or not an object");
  }
  if (!m.contains("inputs") || !m["inputs"].is_array()) {
    problems.push_back("manifest.inputs is missing or not an array");
  } else {
    for (std::size_t i = 0; i < m["inputs"].size(); ++i) {
      const Json& e = m["inputs"][i];
      const std::string where = "manifest.inputs[" + std::to_string(i) + "]";
      if (!e.is_object() || !e.contains("file") || !e["file"].is_string() || !e.contains("sha256") ||
          !e["sha256"].is_string()) {
        problems.push_back(where + " needs string fields file and sha256");
        continue;
      }
      const auto h = e["sha256"].get<std::string>();
      if (h.size() != 64 || h.find_first_not_of("0123456789abcdef") != std::string::npos) {
        problems.push_back(where + ".sha256 is not a 64-digit lowercase hex digest");
      }
    }
  }
  return problems;
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json analyze_report(const RunManifest& manifest, const TrajectoryBundle& bundle,
                    const std::vector<CurvatureSummary>& summaries) {
  const CorpusTotals tot = corpus_totals(summaries);
  Json trajs = Json::array();
  for (std::size_t t = 0; t < summaries.size(); ++t) {
    const auto& s = summaries[t];
    const auto& src = bundle.trajectories[t];
    trajs.push_back({{"id", s.trajectory_id},
                     {"token_text", src.token_text},
                     {"sentence_id", src.sentence_id},
                     {"word_index", src.word_index},
                     {"theta_deg", theta_degrees(s.angles)},
                     {"path_length", s.path_length},
                     {"chord", s.chord},
                     {"ratio", opt(s.ratio)},
                     {"flat", s.flat_count},
                     {"sharp", s.sharp_count},
                     {"tail", s.tail_count}});
  }
  const std::optional<double> mean_deg =
      tot.mean_angle_rad ? std::optional(radians_to_degrees(*tot.mean_angle_rad)) : std::nullopt;
  return Json{{"manifest", manifest.to_json()},
              {"bundle",
               {{"model_name", bundle.model_name},
                {"dim", bundle.dim},
                {"points_per_trajectory", bundle.points_per_trajectory}}},
              {"totals",
               {{"trajectories", tot.trajectories},
                {"angles", tot.angles},
                {"undefined_angles", tot.undefined_angles},
                {"flat", tot.flat},
                {"sharp", tot.sharp},
                {"tail", tot.flat + tot.sharp},
                {"mean_ratio", opt(tot.mean_ratio)},
                {"degenerate_ratio_trajectories", tot.degenerate_ratio_count},
                {"mean_theta_deg", opt(mean_deg)}}},
              {"trajectories", trajs}};
}

Json nulltest_report(const RunManifest& manifest, const TrajectoryBundle& bundle,
                     const std::vector<CurvatureSummary>& summaries,
                     const std::vector<NullDraws>& nulls, const NullConfig& ncfg,
                     const PooledReport& pooled, const std::optional<PairedReport>& paired) {
  const CorpusTotals tot = corpus_totals(summaries);
  double null_flat = 0.0, null_sharp = 0.0;
  for (const auto& n : nulls) {
    null_flat += n.mean_flat();
    null_sharp += n.mean_sharp();
  }
  std::optional<std::int64_t> c_min, c_max;
  double c_sum = 0.0;
  for (auto c : pooled.c_pool_null) {
    c_sum += static_cast<double>(c);
    c_min = c_min ? std::min(*c_min, c) : c;
    c_max = c_max ? std::max(*c_max, c) : c;
  }
  const std::size_t S = pooled.c_pool_null.size();
  double r_sum = 0.0;
  std::size_t r_n = 0;
  for (const auto& r : pooled.r_bar_null) {
    if (r) {
      r_sum += *r;
      ++r_n;
    }
  }
  const std::optional<double> r_null_mean =
      r_n ? std::optional(r_sum / static_cast<double>(r_n)) : std::nullopt;

  Json trajs = Json::array();
  for (std::size_t t = 0; t < summaries.size(); ++t) {
    Json row{{"id", summaries[t].trajectory_id},
             {"token_text", bundle.trajectories[t].token_text},
             {"tail", summaries[t].tail_count},
             {"null_mean_tail", nulls[t].mean_c()},
             {"ratio", opt(summaries[t].ratio)},
             {"null_mean_ratio", opt(nulls[t].mean_r())}};
    if (paired) {
      row["d_c"] = paired->d_c[t];
      row["d_r"] = opt(paired->d_r[t]);
    }
    trajs.push_back(row);
  }

  return Json{
      {"manifest", manifest.to_json()},
      {"observed",
       {{"trajectories", tot.trajectories},
        {"angles", tot.angles},
        {"flat", tot.flat},
        {"sharp", tot.sharp},
        {"tail", tot.flat + tot.sharp},
        {"mean_ratio", opt(tot.mean_ratio)}}},
      {"null",
       {{"method", null_method_name(ncfg.method)},
        {"samples", ncfg.samples},
        {"mean_flat", null_flat},
        {"mean_sharp", null_sharp},
        {"mean_tail", S ? c_sum / static_cast<double>(S) : 0.0},
        {"mean_ratio", opt(r_null_mean)}}},
      {"pooled",
       {{"c",
         {{"observed", pooled.c_pool_obs},
          {"null_mean", S ? c_sum / static_cast<double>(S) : 0.0},
          {"null_min", c_min ? Json(*c_min) : Json(nullptr)},
          {"null_max", c_max ? Json(*c_max) : Json(nullptr)},
          {"mean_delta", pooled.mean_delta_c()},
          {"p_mc", pooled.p_mc_c}}},
        {"r",
         {{"observed", opt(pooled.r_bar_obs)},
          {"null_mean", opt(r_null_mean)},
          {"mean_delta", opt(pooled.mean_delta_r())},
          {"p_mc", pooled.p_mc_r},
          {"trajectories", pooled.r_trajectories},
          {"excluded_trajectories", pooled.r_excluded_trajectories},
          {"degenerate_null_draws", pooled.r_degenerate_null_draws}}}}},
      {"paired",
       {{"c", paired ? paired_json(paired->c) : unavailable_paired()},
        {"r", paired ? paired_json(paired->r) : unavailable_paired()}}},
      {"trajectories", trajs}};
}

Json lensing_report(const RunManifest& manifest, const std::vector<DivergenceReport>& reports,
                    const CohortSummary& cohort) {
  Json triples = Json::array();
  for (const auto& r : reports) {
    Json row{{"id", r.triple_id}};
    for (Pairing p : kPairings) row[pairing_name(p)] = pair_json(r.at(p));
    triples.push_back(row);
  }
  Json summary{{"triples", cohort.triples}};
  for (Pairing p : kPairings) {
    Json per = Json::object();
    for (DivergenceMetric m : kDivergenceMetrics) per[metric_name(m)] = cohort_stat_json(cohort.at(p, m));
    summary[pairing_name(p)] = per;
  }
  Json ordering = Json::object();
  for (DivergenceMetric m : kDivergenceMetrics) ordering[metric_name(m)] = cohort.ordering_holds(m);
  ordering["all_metrics"] = cohort.ordering_holds();
  ordering["status"] = cohort.ordering_holds() ? "consistent" : "inconsistent";
  const Json units{{"d_final", "cosine distance"},
                   {"d_layer", "mean Euclidean distance, embedding units"},
                   {"delta_curv", "mean cosine distance of second differences"},
                   {"delta_theta_rad", "radians"}};
  return Json{{"manifest", manifest.to_json()},
              {"units", units},
              {"cohort", summary},
              {"ordering", ordering},
              {"triples", triples}};
}

Json landscape_report(const RunManifest& manifest, const Projection& proj, const Foliation& foliation,
                      const std::vector<HeatGrid>& grids, double bandwidth_fraction) {
  Json frames = Json::array();
  for (std::size_t f = 0; f < foliation.frames.size(); ++f) {
    const auto& fr = foliation.frames[f];
    Json tokens = Json::array();
    for (const auto& tp : fr.tokens) {
      tokens.push_back({{"id", tp.trajectory_id},
                        {"token_text", tp.token_text},
                        {"x", tp.position.x()},
                        {"y", tp.position.y()},
                        {"theta_deg", tp.theta_rad ? Json(radians_to_degrees(*tp.theta_rad))
                                                   : Json(nullptr)}});
    }
    Json rows = Json::array();
    if (f < grids.size()) {
      const auto& g = grids[f];
      for (std::size_t r = 0; r < g.resolution; ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < g.resolution; ++c) row.push_back(g.at(r, c));
        rows.push_back(row);
      }
    }
    frames.push_back({{"layer", fr.layer_index}, {"tokens", tokens}, {"grid_deg", rows}});
  }
  Json tracks = Json::array();
  for (const auto& t : foliation.tracks) {
    Json xs = Json::array(), ys = Json::array();
    for (const auto& p : t.positions) {
      xs.push_back(p.x());
      ys.push_back(p.y());
    }
    tracks.push_back({{"id", t.trajectory_id}, {"token_text", t.token_text}, {"layers", t.layers},
                      {"x", xs}, {"y", ys}});
  }
  const Bounds b = grids.empty() ? frame_bounds(foliation.frames) : grids.front().bounds;
  return Json{
      {"manifest", manifest.to_json()},
      {"projection",
       {{"explained_variance", {proj.explained_variance[0], proj.explained_variance[1]}},
        {"total_variance", proj.total_variance},
        {"explained_fraction", proj.explained_fraction()}}},
      {"grid",
       {{"resolution", grids.empty() ? 0 : grids.front().resolution},
        {"bandwidth_fraction", bandwidth_fraction},
        {"bandwidth", grids.empty() ? 0.0 : grids.front().bandwidth},
        {"bounds", bounds_json(b)},
        {"row_axis", "y"},
        {"neutral_deg", 90.0}}},
      {"frames", frames},
      {"tracks", tracks}};
}

Json geometry_report(const RunManifest& manifest, const GeometryCheckConfig& cfg,
                     const GeometryCheckReport& report) {
  Json checks = Json::array();
  Json failing = Json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"tolerance", c.tolerance},
                      {"max_value", c.max_value},
                      {"passed", c.passed},
                      {"worst_trial", c.worst_trial},
                      {"worst_trial_seed", c.worst_seed}});
    if (!c.passed) failing.push_back({{"check", c.name}, {"trial", c.worst_trial}, {"seed", c.worst_seed}});
  }
  return Json{{"manifest", manifest.to_json()},
              {"seed", cfg.seed},
              {"trials", cfg.trials},
              {"passed", report.passed()},
              {"checks", checks},
              {"failing", failing}};
}

}  // namespace trajgeo
