// Copyright 2026 The ccminer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CCMINER_IO_HPP_
#define CCMINER_IO_HPP_

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ccminer/detectors.hpp"
#include "ccminer/environment.hpp"
#include "ccminer/errors.hpp"
#include "ccminer/pipeline.hpp"
#include "ccminer/synthetic.hpp"
#include "ccminer/taxonomy.hpp"
#include "ccminer/trajectory.hpp"

namespace ccm {

inline constexpr const char* kToolName = "ccminer";
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kReportFormatVersion = 1;

using ordered_json = nlohmann::ordered_json;

namespace detail {

/// Shortest decimal string that parses back to the same double.
inline std::string fmt_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

inline double parse_double(const std::string& field, std::size_t line, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size())
    throw parse_error(line, std::string("invalid ") + what + " '" + field + "'");
  return v;
}

inline std::vector<std::string> split_csv(const std::string& row) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : row) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

/// CSV (track_id,t,x,y,heading?,speed?,class?; header required) or JSONL
/// (one trajectory object per line). Strict: malformed rows are fatal with
/// the offending line number; unknown CSV columns are ignored with a warning.
inline dataset parse_trajectories(std::istream& in, const std::string& format = "csv") {
  dataset out;
  if (format == "csv") {
    std::string row;
    std::size_t line = 0;
    std::map<std::string, std::size_t> columns;
    std::vector<std::string> track_order;
    std::map<std::string, trajectory> tracks;
    while (std::getline(in, row)) {
      ++line;
      if (row.empty() || row[0] == '#') continue;
      const auto fields = detail::split_csv(row);
      if (columns.empty()) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
          static const char* known[] = {"track_id", "t", "x", "y", "heading", "speed", "class"};
          if (std::find(std::begin(known), std::end(known), fields[i]) == std::end(known)) {
            std::cerr << "warning: ignoring unknown column '" << fields[i] << "'\n";
            continue;
          }
          columns[fields[i]] = i;
        }
        for (const char* required : {"track_id", "t", "x", "y"})
          if (!columns.count(required))
            throw parse_error(line, std::string("missing required column '") + required + "'");
        continue;
      }
      if (fields.size() < columns.size())
        throw parse_error(line, "row has fewer fields than the header");
      const auto get = [&](const char* name) -> std::optional<std::string> {
        const auto it = columns.find(name);
        if (it == columns.end() || it->second >= fields.size()) return std::nullopt;
        if (fields[it->second].empty()) return std::nullopt;
        return fields[it->second];
      };
      const std::string id = fields[columns["track_id"]];
      if (id.empty()) throw parse_error(line, "empty track_id");
      state s;
      s.t = detail::parse_double(*get("t"), line, "t");
      s.x = detail::parse_double(*get("x"), line, "x");
      s.y = detail::parse_double(*get("y"), line, "y");
      if (const auto h = get("heading")) s.heading = detail::parse_double(*h, line, "heading");
      if (const auto v = get("speed")) s.speed = detail::parse_double(*v, line, "speed");
      if (!tracks.count(id)) {
        track_order.push_back(id);
        tracks[id].id = id;
      }
      if (const auto c = get("class")) {
        const auto cls = road_user_class_from(*c);
        if (!cls) throw parse_error(line, "unknown class '" + *c + "'");
        tracks[id].user_class = *cls;
      }
      tracks[id].states.push_back(s);
    }
    for (const auto& id : track_order) out.trajectories.push_back(validate(tracks[id]));
  } else if (format == "jsonl") {
    std::string row;
    std::size_t line = 0;
    while (std::getline(in, row)) {
      ++line;
      if (row.empty()) continue;
      ordered_json j = ordered_json::parse(row, nullptr, false);
      if (j.is_discarded()) throw parse_error(line, "invalid JSON");
      try {
        trajectory t;
        t.id = j.at("id").get<std::string>();
        if (j.contains("class")) {
          const auto cls = road_user_class_from(j["class"].get<std::string>());
          if (!cls) throw parse_error(line, "unknown class");
          t.user_class = *cls;
        }
        for (const auto& js : j.at("states")) {
          state s;
          s.t = js.at("t").get<double>();
          s.x = js.at("x").get<double>();
          s.y = js.at("y").get<double>();
          if (js.contains("heading")) s.heading = js["heading"].get<double>();
          if (js.contains("speed")) s.speed = js["speed"].get<double>();
          t.states.push_back(s);
        }
        out.trajectories.push_back(validate(std::move(t)));
      } catch (const ordered_json::exception& e) {
        throw parse_error(line, e.what());
      }
    }
  } else {
    throw parse_error(0, "unknown trajectory format '" + format + "'");
  }
  if (out.trajectories.empty()) throw empty_input();
  return out;
}

inline std::string serialize_trajectories(const dataset& data, const std::string& format = "csv") {
  std::ostringstream out;
  if (format == "csv") {
    out << "# units: t s, x m, y m, heading rad, speed m/s\n";
    out << "track_id,t,x,y,heading,speed,class\n";
    for (const auto& t : data.trajectories)
      for (const auto& s : t.states) {
        out << t.id << ',' << detail::fmt_double(s.t) << ',' << detail::fmt_double(s.x) << ','
            << detail::fmt_double(s.y) << ',' << detail::fmt_double(s.heading) << ','
            << (s.speed ? detail::fmt_double(*s.speed) : "") << ',' << to_string(t.user_class)
            << '\n';
      }
  } else if (format == "jsonl") {
    for (const auto& t : data.trajectories) {
      ordered_json j;
      j["id"] = t.id;
      j["class"] = to_string(t.user_class);
      j["states"] = ordered_json::array();
      for (const auto& s : t.states) {
        ordered_json js;
        js["t"] = s.t;
        js["x"] = s.x;
        js["y"] = s.y;
        js["heading"] = s.heading;
        if (s.speed) js["speed"] = *s.speed;
        j["states"].push_back(js);
      }
      out << j.dump() << '\n';
    }
  } else {
    throw parse_error(0, "unknown trajectory format '" + format + "'");
  }
  return out.str();
}

namespace detail {

inline vec2 vec2_from(const ordered_json& j) {
  if (!j.is_array() || j.size() != 2) throw schema_error("expected [x, y] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline ordered_json vec2_to(vec2 v) { return ordered_json::array({v.x, v.y}); }

}  // namespace detail

/// Map JSON with referential integrity checked at load.
inline environment_map parse_map(std::istream& in) {
  ordered_json j = ordered_json::parse(in, nullptr, false);
  if (j.is_discarded()) throw schema_error("map file is not valid JSON");
  environment_map map;
  try {
    for (const auto& jl : j.value("lanes", ordered_json::array())) {
      lane_segment lane;
      lane.id = jl.at("id").get<std::string>();
      lane.width = jl.value("width", 3.5);
      lane.speed_limit = jl.value("speed_limit", 13.89);
      if (jl.contains("oncoming_lane_id"))
        lane.oncoming_lane_id = jl["oncoming_lane_id"].get<std::string>();
      std::vector<vec2> pts;
      for (const auto& jp : jl.at("centerline")) pts.push_back(detail::vec2_from(jp));
      if (pts.size() < 2) throw schema_error("lane '" + lane.id + "' centerline needs >= 2 points");
      lane.centerline = polyline(std::move(pts));
      map.lanes.push_back(std::move(lane));
    }
    for (const auto& js : j.value("signs", ordered_json::array())) {
      traffic_sign sign;
      sign.id = js.at("id").get<std::string>();
      const auto kind = sign_kind_from(js.at("kind").get<std::string>());
      if (!kind) throw schema_error("unknown sign kind in '" + sign.id + "'");
      sign.kind = *kind;
      sign.value = js.value("value", 0.0);
      sign.position = detail::vec2_from(js.at("position"));
      for (const auto& ja : js.at("applies_to")) sign.applies_to.push_back(ja.get<std::string>());
      if (sign.applies_to.empty()) throw schema_error("sign '" + sign.id + "' applies to nothing");
      map.signs.push_back(std::move(sign));
    }
    for (const auto& jl : j.value("loops", ordered_json::array())) {
      virtual_loop loop;
      loop.id = jl.at("id").get<std::string>();
      loop.label = jl.value("label", loop.id);
      const auto& gate = jl.at("gate");
      if (!gate.is_array() || gate.size() != 2) throw schema_error("loop gate needs two points");
      loop.gate_a = detail::vec2_from(gate[0]);
      loop.gate_b = detail::vec2_from(gate[1]);
      if ((loop.gate_a - loop.gate_b).norm() < 1e-12)
        throw schema_error("loop '" + loop.id + "' gate is degenerate");
      map.loops.push_back(std::move(loop));
    }
    for (const auto& jz : j.value("conflict_zones", ordered_json::array())) {
      conflict_zone zone;
      zone.id = jz.at("id").get<std::string>();
      for (const auto& jp : jz.at("polygon")) zone.polygon.push_back(detail::vec2_from(jp));
      if (zone.polygon.size() < 3) throw schema_error("zone '" + zone.id + "' polygon too small");
      const auto& pair = jz.at("lane_pair");
      zone.lane_pair = {pair.at(0).get<std::string>(), pair.at(1).get<std::string>()};
      zone.priority_lane = jz.at("priority_lane").get<std::string>();
      if (zone.priority_lane != zone.lane_pair.first && zone.priority_lane != zone.lane_pair.second)
        throw schema_error("zone '" + zone.id + "' priority lane not in its pair");
      map.conflict_zones.push_back(std::move(zone));
    }
  } catch (const ordered_json::exception& e) {
    throw schema_error(e.what());
  }
  // referential integrity
  for (const auto& lane : map.lanes)
    if (lane.oncoming_lane_id && !map.find_lane(*lane.oncoming_lane_id))
      throw dangling_reference(*lane.oncoming_lane_id);
  for (const auto& sign : map.signs)
    for (const auto& lane_id : sign.applies_to)
      if (!map.find_lane(lane_id)) throw dangling_reference(lane_id);
  for (const auto& zone : map.conflict_zones) {
    if (!map.find_lane(zone.lane_pair.first)) throw dangling_reference(zone.lane_pair.first);
    if (!map.find_lane(zone.lane_pair.second)) throw dangling_reference(zone.lane_pair.second);
  }
  return map;
}

inline ordered_json map_to_json(const environment_map& map) {
  ordered_json j;
  j["format_version"] = kReportFormatVersion;
  j["lanes"] = ordered_json::array();
  for (const auto& lane : map.lanes) {
    ordered_json jl;
    jl["id"] = lane.id;
    jl["width"] = lane.width;
    jl["speed_limit"] = lane.speed_limit;
    if (lane.oncoming_lane_id) jl["oncoming_lane_id"] = *lane.oncoming_lane_id;
    jl["centerline"] = ordered_json::array();
    for (const auto& p : lane.centerline.points()) jl["centerline"].push_back(detail::vec2_to(p));
    j["lanes"].push_back(std::move(jl));
  }
  j["signs"] = ordered_json::array();
  for (const auto& sign : map.signs) {
    ordered_json js;
    js["id"] = sign.id;
    js["kind"] = to_string(sign.kind);
    if (sign.kind == sign_kind::speed_limit) js["value"] = sign.value;
    js["position"] = detail::vec2_to(sign.position);
    js["applies_to"] = sign.applies_to;
    j["signs"].push_back(std::move(js));
  }
  j["loops"] = ordered_json::array();
  for (const auto& loop : map.loops) {
    ordered_json jl;
    jl["id"] = loop.id;
    jl["label"] = loop.label;
    jl["gate"] = ordered_json::array({detail::vec2_to(loop.gate_a), detail::vec2_to(loop.gate_b)});
    j["loops"].push_back(std::move(jl));
  }
  j["conflict_zones"] = ordered_json::array();
  for (const auto& zone : map.conflict_zones) {
    ordered_json jz;
    jz["id"] = zone.id;
    jz["polygon"] = ordered_json::array();
    for (const auto& p : zone.polygon) jz["polygon"].push_back(detail::vec2_to(p));
    jz["lane_pair"] = ordered_json::array({zone.lane_pair.first, zone.lane_pair.second});
    jz["priority_lane"] = zone.priority_lane;
    j["conflict_zones"].push_back(std::move(jz));
  }
  return j;
}

inline ordered_json config_to_json(const pipeline_config& cfg) {
  const auto& d = cfg.detectors;
  ordered_json j;
  j["resample_dt"] = cfg.resample_dt;
  j["smoothing_window"] = cfg.smoothing_window;
  j["mode"] = cfg.mode == label_mode::dataset ? "dataset" : "analysis";
  j["a_brake"] = d.a_brake;
  j["a_lat_max"] = d.a_lat_max;
  j["j_max"] = d.j_max;
  j["ttc_crit"] = d.ttc_crit;
  j["thw_crit"] = d.thw_crit;
  j["thw_sustain"] = d.thw_sustain;
  j["following_lateral_tolerance"] = d.following_lateral_tolerance;
  j["wrong_way_deviation"] = d.wrong_way_deviation;
  j["wrong_way_sustain"] = d.wrong_way_sustain;
  j["speeding_factor"] = d.speeding_factor;
  j["speeding_sustain"] = d.speeding_sustain;
  j["cutting_curvature"] = d.cutting_curvature;
  j["cutting_sustain"] = d.cutting_sustain;
  j["ttce_gate"] = d.ttce_gate;
  j["a_yield"] = d.a_yield;
  j["v_phys"] = d.v_phys;
  j["gap_factor"] = d.gap_factor;
  j["burst_threshold"] = d.burst_threshold;
  j["burst_max_run"] = d.burst_max_run;
  j["density_k"] = d.density_k;
  j["density_samples"] = d.density_samples;
  j["artifact_process_noise"] = d.artifact_process_noise;
  j["artifact_measurement_std"] = d.artifact_measurement_std;
  j["collision_radius"] = d.metrics.collision_radius;
  j["pair_horizon"] = d.metrics.pair_horizon;
  j["reference_process_noise"] = cfg.reference.process_noise_x;
  j["reference_measurement_std"] = cfg.reference_meas.position_noise_std;
  return j;
}

inline pipeline_config config_from_json(const ordered_json& j) {
  pipeline_config cfg;
  auto& d = cfg.detectors;
  const auto get = [&](const char* key, double fallback) { return j.value(key, fallback); };
  cfg.resample_dt = get("resample_dt", cfg.resample_dt);
  cfg.smoothing_window = j.value("smoothing_window", cfg.smoothing_window);
  if (j.value("mode", "analysis") == std::string("dataset")) cfg.mode = label_mode::dataset;
  d.a_brake = get("a_brake", d.a_brake);
  d.a_lat_max = get("a_lat_max", d.a_lat_max);
  d.j_max = get("j_max", d.j_max);
  d.ttc_crit = get("ttc_crit", d.ttc_crit);
  d.thw_crit = get("thw_crit", d.thw_crit);
  d.thw_sustain = get("thw_sustain", d.thw_sustain);
  d.following_lateral_tolerance = get("following_lateral_tolerance", d.following_lateral_tolerance);
  d.wrong_way_deviation = get("wrong_way_deviation", d.wrong_way_deviation);
  d.wrong_way_sustain = get("wrong_way_sustain", d.wrong_way_sustain);
  d.speeding_factor = get("speeding_factor", d.speeding_factor);
  d.speeding_sustain = get("speeding_sustain", d.speeding_sustain);
  d.cutting_curvature = get("cutting_curvature", d.cutting_curvature);
  d.cutting_sustain = get("cutting_sustain", d.cutting_sustain);
  d.ttce_gate = get("ttce_gate", d.ttce_gate);
  d.a_yield = get("a_yield", d.a_yield);
  d.v_phys = get("v_phys", d.v_phys);
  d.gap_factor = get("gap_factor", d.gap_factor);
  d.burst_threshold = get("burst_threshold", d.burst_threshold);
  d.burst_max_run = j.value("burst_max_run", d.burst_max_run);
  d.density_k = j.value("density_k", d.density_k);
  d.density_samples = j.value("density_samples", d.density_samples);
  d.artifact_process_noise = get("artifact_process_noise", d.artifact_process_noise);
  d.artifact_measurement_std = get("artifact_measurement_std", d.artifact_measurement_std);
  d.metrics.collision_radius = get("collision_radius", d.metrics.collision_radius);
  d.metrics.pair_horizon = get("pair_horizon", d.metrics.pair_horizon);
  cfg.reference.process_noise_x = cfg.reference.process_noise_y =
      get("reference_process_noise", cfg.reference.process_noise_x);
  cfg.reference_meas.position_noise_std =
      get("reference_measurement_std", cfg.reference_meas.position_noise_std);
  return cfg;
}

inline ordered_json detection_to_json(const detection& det, const corner_case_label& lbl) {
  ordered_json j;
  j["ego_id"] = det.ego_id;
  j["other_ids"] = det.other_ids;
  j["t_start"] = det.t_start;
  j["t_end"] = det.t_end;
  j["kind"] = to_string(det.kind);
  j["severity"] = det.severity;
  j["evidence"] = det.evidence;
  j["required_data"] = to_string(det.required_data);
  j["candidate_stages"] = ordered_json::array();
  for (row_stage s : det.candidate_stages) j["candidate_stages"].push_back(to_string(s));
  j["uses_map_evidence"] = det.uses_map_evidence;
  ordered_json jl;
  jl["column"] = to_string(lbl.column);
  jl["stages"] = ordered_json::array();
  for (row_stage s : lbl.stages) jl["stages"].push_back(to_string(s));
  j["label"] = std::move(jl);
  return j;
}

/// Canonical report document. No timestamp: identical inputs and config
/// must serialize to identical bytes.
inline ordered_json report_to_json(const analysis_report& report, const pipeline_config& cfg) {
  ordered_json j;
  j["format_version"] = kReportFormatVersion;
  j["tool"] = ordered_json{{"name", kToolName}, {"version", kToolVersion}};
  j["config"] = config_to_json(cfg);
  j["detections"] = ordered_json::array();
  for (std::size_t i = 0; i < report.detections.size(); ++i)
    j["detections"].push_back(detection_to_json(report.detections[i], report.labels[i]));
  j["situations"] = ordered_json::array();
  for (const auto& sit : report.situations) {
    ordered_json js;
    js["ego_id"] = sit.ego_id;
    js["t_start"] = sit.t_start;
    js["t_end"] = sit.t_end;
    js["kinds"] = ordered_json::array();
    for (const auto& lbl : sit.labels) js["kinds"].push_back(to_string(lbl.det.kind));
    j["situations"].push_back(std::move(js));
  }
  j["scores"] = ordered_json::array();
  for (const auto& sc : report.scores) {
    ordered_json js;
    js["id"] = sc.id;
    js["innovation_score"] = sc.innovation_score;
    js["log_likelihood"] = sc.log_likelihood;
    if (sc.density_score) js["density_score"] = *sc.density_score;
    j["scores"].push_back(std::move(js));
  }
  return j;
}

inline std::vector<detection> detections_from_json(const ordered_json& report) {
  std::vector<detection> out;
  for (const auto& jd : report.value("detections", ordered_json::array())) {
    detection d;
    try {
      d.ego_id = jd.at("ego_id").get<std::string>();
      for (const auto& o : jd.value("other_ids", ordered_json::array()))
        d.other_ids.insert(o.get<std::string>());
      d.t_start = jd.at("t_start").get<double>();
      d.t_end = jd.at("t_end").get<double>();
      const auto kind = detector_kind_from(jd.at("kind").get<std::string>());
      if (!kind) throw schema_error("unknown detector kind");
      d.kind = *kind;
      d.severity = jd.value("severity", 0.0);
      const ordered_json evidence = jd.value("evidence", ordered_json::object());
      for (const auto& [key, value] : evidence.items()) d.evidence[key] = value.get<double>();
      const auto col = column_class_from(jd.at("required_data").get<std::string>());
      if (!col) throw schema_error("unknown column class");
      d.required_data = *col;
      for (const auto& s : jd.at("candidate_stages")) {
        const auto stage = row_stage_from(s.get<std::string>());
        if (!stage) throw schema_error("unknown stage");
        d.candidate_stages.insert(*stage);
      }
      d.uses_map_evidence = jd.value("uses_map_evidence", false);
    } catch (const ordered_json::exception& e) {
      throw schema_error(e.what());
    }
    out.push_back(std::move(d));
  }
  return out;
}

/// Scenario document for `generate`: either {"standard": "<injection kind>"}
/// or a full spec with an optional injections array.
inline standard_case parse_scenario(std::istream& in) {
  ordered_json j = ordered_json::parse(in, nullptr, false);
  if (j.is_discarded()) throw schema_error("scenario file is not valid JSON");
  standard_case c;
  try {
    if (j.contains("standard")) {
      const auto kind = injection_kind_from(j["standard"].get<std::string>());
      if (!kind) throw schema_error("unknown standard scenario");
      return standard_scenario(*kind, j.value("seed", 0ULL));
    }
    const auto tmpl = map_template_from(j.at("template").get<std::string>());
    if (!tmpl) throw schema_error("unknown map template");
    c.spec.tmpl = *tmpl;
    c.spec.curve_radius = j.value("curve_radius", c.spec.curve_radius);
    c.spec.speed_limit = j.value("speed_limit", c.spec.speed_limit);
    c.spec.n_vehicles = j.value("n_vehicles", c.spec.n_vehicles);
    c.spec.duration = j.value("duration", c.spec.duration);
    c.spec.dt = j.value("dt", c.spec.dt);
    c.spec.stagger = j.value("stagger", c.spec.stagger);
    c.spec.seed = j.value("seed", c.spec.seed);
    for (const auto& ji : j.value("injections", ordered_json::array())) {
      injection_spec inj;
      const auto kind = injection_kind_from(ji.at("kind").get<std::string>());
      if (!kind) throw schema_error("unknown injection kind");
      inj.kind = *kind;
      inj.target = ji.value("target", 0ULL);
      inj.onset = ji.value("onset", 0.0);
      inj.aux = ji.value("aux", "");
      const ordered_json params = ji.value("params", ordered_json::object());
      for (const auto& [key, value] : params.items()) inj.params[key] = value.get<double>();
      c.injections.push_back(std::move(inj));
    }
  } catch (const ordered_json::exception& e) {
    throw schema_error(e.what());
  }
  return c;
}

inline ordered_json ground_truth_to_json(const std::vector<ground_truth_item>& truth) {
  ordered_json j = ordered_json::array();
  for (const auto& gt : truth) {
    ordered_json jg;
    jg["source"] = to_string(gt.source);
    jg["expected"] = to_string(gt.expected);
    jg["ego_id"] = gt.ego_id;
    jg["t_start"] = gt.t_start;
    jg["t_end"] = gt.t_end;
    jg["column"] = to_string(gt.column);
    jg["stages"] = ordered_json::array();
    for (row_stage s : gt.stages) jg["stages"].push_back(to_string(s));
    j.push_back(std::move(jg));
  }
  return j;
}

}  // namespace ccm

#endif  // CCMINER_IO_HPP_
