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

#ifndef CCMINER_DETECTORS_HPP_
#define CCMINER_DETECTORS_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ccminer/environment.hpp"
#include "ccminer/errors.hpp"
#include "ccminer/metrics.hpp"
#include "ccminer/model.hpp"
#include "ccminer/trajectory.hpp"

namespace ccm {

/// The minimal kind of data needed to detect a corner case.
enum class column_class { ego_trajectory, ego_others, ego_environment, ego_others_environment };

inline const char* to_string(column_class c) {
  switch (c) {
    case column_class::ego_trajectory: return "ego_trajectory";
    case column_class::ego_others: return "ego_others";
    case column_class::ego_environment: return "ego_environment";
    default: return "ego_others_environment";
  }
}

/// Originating component in the unified road-user processing pipeline.
enum class row_stage {
  perception = 1,
  decision_making = 2,
  goal_risk_tolerance = 3,
  execution = 4,
  body = 5,
  comp_attentional_resources = 6,
  knowledge = 7,
  environment = 8,
  trajectory_recording = 9,
  static_environment_info = 10,
};

inline const char* to_string(row_stage s) {
  switch (s) {
    case row_stage::perception: return "perception";
    case row_stage::decision_making: return "decision_making";
    case row_stage::goal_risk_tolerance: return "goal_risk_tolerance";
    case row_stage::execution: return "execution";
    case row_stage::body: return "body";
    case row_stage::comp_attentional_resources: return "comp_attentional_resources";
    case row_stage::knowledge: return "knowledge";
    case row_stage::environment: return "environment";
    case row_stage::trajectory_recording: return "trajectory_recording";
    default: return "static_environment_info";
  }
}

inline std::optional<row_stage> row_stage_from(const std::string& s) {
  for (int i = 1; i <= 10; ++i) {
    const auto r = static_cast<row_stage>(i);
    if (s == to_string(r)) return r;
  }
  return std::nullopt;
}

inline std::optional<column_class> column_class_from(const std::string& s) {
  for (int i = 0; i < 4; ++i) {
    const auto c = static_cast<column_class>(i);
    if (s == to_string(c)) return c;
  }
  return std::nullopt;
}

enum class detector_kind {
  harsh_longitudinal,
  curve_overspeed,
  jerk,
  near_collision,
  tailgating,
  wrong_way,
  speeding,
  u_turn,
  cutting_corner,
  priority_violation,
  teleport,
  dropout,
  noise_spike,
  missing_sign,
};

inline const char* to_string(detector_kind k) {
  switch (k) {
    case detector_kind::harsh_longitudinal: return "harsh_longitudinal";
    case detector_kind::curve_overspeed: return "curve_overspeed";
    case detector_kind::jerk: return "jerk";
    case detector_kind::near_collision: return "near_collision";
    case detector_kind::tailgating: return "tailgating";
    case detector_kind::wrong_way: return "wrong_way";
    case detector_kind::speeding: return "speeding";
    case detector_kind::u_turn: return "u_turn";
    case detector_kind::cutting_corner: return "cutting_corner";
    case detector_kind::priority_violation: return "priority_violation";
    case detector_kind::teleport: return "teleport";
    case detector_kind::dropout: return "dropout";
    case detector_kind::noise_spike: return "noise_spike";
    default: return "missing_sign";
  }
}

inline std::optional<detector_kind> detector_kind_from(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(detector_kind::missing_sign); ++i) {
    const auto k = static_cast<detector_kind>(i);
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

/// A localized corner-case finding.
struct detection {
  std::string ego_id;
  std::set<std::string> other_ids;
  double t_start = 0.0;
  double t_end = 0.0;
  detector_kind kind = detector_kind::harsh_longitudinal;
  double severity = 0.0;  // exceedance ratio relative to the threshold
  std::map<std::string, double> evidence;
  column_class required_data = column_class::ego_trajectory;
  std::set<row_stage> candidate_stages;
  bool uses_map_evidence = false;
};

/// All thresholds in SI units. The catalog names phenomena, not numbers, so
/// every value is configurable and echoed into reports.
struct detector_config {
  double a_brake = 6.0;      // m/s^2, |longitudinal| beyond this is harsh
  double a_lat_max = 4.0;    // m/s^2, curve overspeed
  double j_max = 15.0;       // m/s^3, longitudinal jerk
  double ttc_crit = 1.5;     // s
  double thw_crit = 1.0;     // s
  double thw_sustain = 3.0;  // s
  double following_lateral_tolerance = 2.0;  // m, same-path gate for thw
  double wrong_way_deviation = 2.0 * std::numbers::pi / 3.0;  // rad (120 deg)
  double wrong_way_sustain = 2.0;   // s
  double speeding_factor = 1.1;     // speed > limit * factor
  double speeding_sustain = 2.0;    // s
  double cutting_curvature = 0.02;  // 1/m, lane curvature gate
  double cutting_sustain = 1.0;     // s
  double ttce_gate = 4.0;           // s, priority user proximity to the zone
  double a_yield = 2.0;             // m/s^2, forced yield deceleration
  double v_phys = 80.0;             // m/s, physical speed bound (teleports)
  double gap_factor = 3.0;          // dropout when dt > factor * median dt
  double burst_threshold = 25.0;    // normalized innovation squared
  std::size_t burst_max_run = 3;    // steps, longer bursts are not spikes
  std::size_t density_k = 5;
  std::size_t density_samples = 32;
  // reference model backing the noise-spike check
  double artifact_process_noise = 2.0;    // m/s^2
  double artifact_measurement_std = 0.5;  // m
  metrics_config metrics;
};

namespace detail {

struct flagged_run {
  std::size_t first;
  std::size_t last;
  double peak;  // peak exceedance ratio
};

template <typename Flagged, typename Ratio>
std::vector<flagged_run> collect_runs(std::size_t n, Flagged flagged, Ratio ratio) {
  std::vector<flagged_run> runs;
  std::size_t i = 0;
  while (i < n) {
    if (!flagged(i)) {
      ++i;
      continue;
    }
    flagged_run run{i, i, ratio(i)};
    while (run.last + 1 < n && flagged(run.last + 1)) {
      ++run.last;
      run.peak = std::max(run.peak, ratio(run.last));
    }
    runs.push_back(run);
    i = run.last + 1;
  }
  return runs;
}

}  // namespace detail

/// Ego-trajectory-only detectors: harsh longitudinal accel, curve overspeed
/// (lateral accel), and longitudinal jerk. Contiguous exceedances merge.
inline std::vector<detection> detect_kinematic(const trajectory& traj,
                                               const detector_config& cfg = {}) {
  if (traj.states.empty() || !traj.states.front().accel_lon) throw missing_kinematics();
  const std::size_t n = traj.states.size();
  const double dt = traj.states[1].t - traj.states[0].t;

  std::vector<double> jerk(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i)
    jerk[i] = (*traj.states[i + 1].accel_lon - *traj.states[i - 1].accel_lon) / (2.0 * dt);

  std::vector<detection> out;
  const auto emit = [&](detector_kind kind, double threshold, auto value,
                        std::set<row_stage> stages, const char* evidence_key) {
    const auto runs = detail::collect_runs(
        n, [&](std::size_t i) { return std::abs(value(i)) > threshold; },
        [&](std::size_t i) { return std::abs(value(i)) / threshold; });
    for (const auto& run : runs) {
      detection d;
      d.ego_id = traj.id;
      d.t_start = traj.states[run.first].t;
      d.t_end = traj.states[run.last].t;
      d.kind = kind;
      d.severity = run.peak;
      d.evidence[evidence_key] = run.peak * threshold;
      d.required_data = column_class::ego_trajectory;
      d.candidate_stages = stages;
      out.push_back(std::move(d));
    }
  };

  emit(detector_kind::harsh_longitudinal, cfg.a_brake,
       [&](std::size_t i) { return *traj.states[i].accel_lon; },
       {row_stage::perception, row_stage::goal_risk_tolerance}, "peak_accel_lon");
  emit(detector_kind::curve_overspeed, cfg.a_lat_max,
       [&](std::size_t i) { return *traj.states[i].accel_lat; },
       {row_stage::decision_making, row_stage::goal_risk_tolerance, row_stage::knowledge},
       "peak_accel_lat");
  emit(detector_kind::jerk, cfg.j_max, [&](std::size_t i) { return jerk[i]; },
       {row_stage::execution}, "peak_jerk");
  return out;
}

namespace detail {

/// Map-free heading-projected headway: gap along a's heading to b, provided
/// b sits nearly ahead on a's path with an aligned heading.
inline std::optional<double> projected_thw(const trajectory& a, const trajectory& b, double t,
                                           const detector_config& cfg) {
  const vec2 pa = a.position_at(t), pb = b.position_at(t);
  const vec2 va = a.velocity_at(t);
  const double speed_a = va.norm();
  if (speed_a < 0.5) return std::nullopt;
  const vec2 dir = va * (1.0 / speed_a);
  const vec2 rel = pb - pa;
  const double gap = rel.dot(dir);
  if (gap <= 0.0) return std::nullopt;
  if (std::abs(rel.cross(dir)) > cfg.following_lateral_tolerance) return std::nullopt;
  const vec2 vb = b.velocity_at(t);
  if (vb.norm() > 0.1 && dir.dot(vb.normalized()) < std::cos(std::numbers::pi / 6.0))
    return std::nullopt;
  return gap / speed_a;
}

}  // namespace detail

/// Interaction detectors over precomputed pair metrics: near collisions and
/// tailgating. Ego is the striking user (higher closing contribution) for
/// near collisions and the follower for tailgating.
inline std::vector<detection> detect_interaction(const dataset& data,
                                                 const std::vector<encounter_metrics>& pairs,
                                                 const detector_config& cfg = {}) {
  std::vector<detection> out;
  for (const auto& pair : pairs) {
    const trajectory* a = data.find(pair.id_a);
    const trajectory* b = data.find(pair.id_b);
    if (!a || !b) continue;

    // near collision: symmetric, handle each unordered pair once
    if (pair.id_a < pair.id_b) {
      const auto runs = detail::collect_runs(
          pair.steps.size(),
          [&](std::size_t i) {
            return pair.steps[i].ttc && *pair.steps[i].ttc < cfg.ttc_crit;
          },
          [&](std::size_t i) { return cfg.ttc_crit / std::max(*pair.steps[i].ttc, 1e-6); });
      for (const auto& run : runs) {
        const double t = pair.steps[run.first].t;
        const vec2 p = b->position_at(t) - a->position_at(t);
        const double closing_a = std::abs(p.dot(a->velocity_at(t)));
        const double closing_b = std::abs(p.dot(b->velocity_at(t)));
        const bool ego_is_a = closing_a > closing_b || (closing_a == closing_b && a->id < b->id);
        detection d;
        d.ego_id = ego_is_a ? a->id : b->id;
        d.other_ids = {ego_is_a ? b->id : a->id};
        d.t_start = pair.steps[run.first].t;
        d.t_end = pair.steps[run.last].t;
        d.kind = detector_kind::near_collision;
        d.severity = run.peak;
        d.evidence["min_ttc"] = cfg.ttc_crit / run.peak;
        d.required_data = column_class::ego_others;
        d.candidate_stages = {row_stage::perception, row_stage::decision_making};
        out.push_back(std::move(d));
      }
    }

    // tailgating: ordered, a is the candidate follower
    {
      std::vector<std::optional<double>> thw(pair.steps.size());
      for (std::size_t i = 0; i < pair.steps.size(); ++i)
        thw[i] = detail::projected_thw(*a, *b, pair.steps[i].t, cfg);
      const auto runs = detail::collect_runs(
          pair.steps.size(), [&](std::size_t i) { return thw[i] && *thw[i] < cfg.thw_crit; },
          [&](std::size_t i) { return cfg.thw_crit / std::max(*thw[i], 1e-6); });
      for (const auto& run : runs) {
        if (pair.steps[run.last].t - pair.steps[run.first].t < cfg.thw_sustain) continue;
        detection d;
        d.ego_id = a->id;
        d.other_ids = {b->id};
        d.t_start = pair.steps[run.first].t;
        d.t_end = pair.steps[run.last].t;
        d.kind = detector_kind::tailgating;
        d.severity = run.peak;
        d.evidence["min_thw"] = cfg.thw_crit / run.peak;
        d.required_data = column_class::ego_others;
        d.candidate_stages = {row_stage::goal_risk_tolerance};
        out.push_back(std::move(d));
      }
    }
  }
  return out;
}

/// Environment-context detectors: wrong-way driving, speeding, forbidden
/// U-turns (virtual loop pairs), and oncoming-lane incursions in curves.
inline std::vector<detection> detect_env_rules(const trajectory& traj, const environment_map& map,
                                               const detector_config& cfg = {}) {
  if (map.lanes.empty()) throw missing_map();
  const auto matches = map_match(traj, map);
  const std::size_t n = traj.states.size();

  std::vector<detection> out;
  const auto sustained_emit = [&](detector_kind kind, double sustain, auto flagged, auto ratio,
                                  std::set<row_stage> stages, const char* key) {
    const auto runs = detail::collect_runs(n, flagged, ratio);
    for (const auto& run : runs) {
      if (traj.states[run.last].t - traj.states[run.first].t < sustain) continue;
      detection d;
      d.ego_id = traj.id;
      d.t_start = traj.states[run.first].t;
      d.t_end = traj.states[run.last].t;
      d.kind = kind;
      d.severity = run.peak;
      d.evidence[key] = run.peak;
      d.required_data = column_class::ego_environment;
      d.candidate_stages = stages;
      d.uses_map_evidence = true;
      out.push_back(std::move(d));
    }
  };

  // (a) wrong-way
  sustained_emit(
      detector_kind::wrong_way, cfg.wrong_way_sustain,
      [&](std::size_t i) {
        return matches[i].lane_id &&
               std::abs(matches[i].heading_deviation) > cfg.wrong_way_deviation;
      },
      [&](std::size_t i) { return std::abs(matches[i].heading_deviation) / cfg.wrong_way_deviation; },
      {row_stage::perception}, "heading_deviation_ratio");

  // (b) speeding
  std::vector<double> limits(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    if (matches[i].lane_id) limits[i] = rules_at(*matches[i].lane_id, map).speed_limit;
  sustained_emit(
      detector_kind::speeding, cfg.speeding_sustain,
      [&](std::size_t i) {
        return traj.states[i].speed.value_or(0.0) > limits[i] * cfg.speeding_factor;
      },
      [&](std::size_t i) { return traj.states[i].speed.value_or(0.0) / limits[i]; },
      {row_stage::goal_risk_tolerance}, "speed_over_limit_ratio");

  // (c) U-turn via entry/exit loop pairs of the same approach
  for (const auto& entry : map.loops) {
    const auto pos = entry.label.rfind("-entry");
    if (pos == std::string::npos) continue;
    const virtual_loop* exit = map.find_loop(entry.label.substr(0, pos) + "-exit");
    if (!exit) continue;
    const auto in_cross = loop_crossings(traj, entry);
    const auto out_cross = loop_crossings(traj, *exit);
    if (in_cross.empty() || out_cross.empty()) continue;
    const double t_in = in_cross.front().t_cross;
    const double t_out = out_cross.front().t_cross;
    // the lane matched when crossing the entry loop carries the rule
    std::size_t idx = traj.index_before(t_in);
    if (!matches[idx].lane_id || rules_at(*matches[idx].lane_id, map).u_turn_allowed) continue;
    detection d;
    d.ego_id = traj.id;
    d.t_start = std::min(t_in, t_out);
    d.t_end = std::max(t_in, t_out);
    d.kind = detector_kind::u_turn;
    d.severity = 1.0;
    d.evidence["t_entry_cross"] = t_in;
    d.evidence["t_exit_cross"] = t_out;
    d.required_data = column_class::ego_environment;
    d.candidate_stages = {row_stage::knowledge};
    d.uses_map_evidence = true;
    out.push_back(std::move(d));
  }

  // (d) cutting corners: on the oncoming lane of the previously driven lane
  // while the local lane geometry is curved
  std::vector<std::optional<std::string>> prev_distinct(n);
  {
    std::optional<std::string> cur, before;
    for (std::size_t i = 0; i < n; ++i) {
      if (matches[i].lane_id && matches[i].lane_id != cur) {
        before = cur;
        cur = matches[i].lane_id;
      }
      prev_distinct[i] = before;
    }
  }
  sustained_emit(
      detector_kind::cutting_corner, cfg.cutting_sustain,
      [&](std::size_t i) {
        if (!matches[i].lane_id || !prev_distinct[i]) return false;
        const lane_segment* before = map.find_lane(*prev_distinct[i]);
        if (!before || !before->oncoming_lane_id) return false;
        // opposing heading separates cutting into the oncoming lane from the
        // later return into the original lane
        return *matches[i].lane_id == *before->oncoming_lane_id &&
               std::abs(matches[i].heading_deviation) > std::numbers::pi / 2.0 &&
               std::abs(matches[i].lane_curvature) > cfg.cutting_curvature;
      },
      [&](std::size_t i) { return std::abs(matches[i].lane_curvature) / cfg.cutting_curvature; },
      {row_stage::goal_risk_tolerance}, "lane_curvature_ratio");

  return out;
}

namespace detail {

struct zone_visit {
  const trajectory* traj;
  std::string approach_lane;
  double t_entry;
  double t_exit;
};

inline std::optional<std::pair<double, double>> zone_occupancy(const trajectory& traj,
                                                               const conflict_zone& zone) {
  std::optional<double> entry;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const bool inside = point_in_polygon(traj.states[i].position(), zone.polygon);
    if (inside && !entry) entry = traj.states[i].t;
    if (!inside && entry) return std::make_pair(*entry, traj.states[i - 1].t);
  }
  if (entry) return std::make_pair(*entry, traj.states.back().t);
  return std::nullopt;
}

inline double distance_to_polygon(vec2 p, const std::vector<vec2>& poly) {
  if (point_in_polygon(p, poly)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
    best = std::min(best, point_segment_distance(p, poly[j], poly[i]).distance);
  return best;
}

}  // namespace detail

/// Right-of-way violations at conflict zones: the non-priority user enters
/// first while the priority user is close, and the priority user is forced
/// to yield (hard deceleration) or the pair becomes ttc-critical.
inline std::vector<detection> detect_priority(const dataset& data, const environment_map& map,
                                              const std::vector<encounter_metrics>& pairs,
                                              const detector_config& cfg = {}) {
  if (map.conflict_zones.empty()) throw no_conflict_zones();
  std::vector<detection> out;

  for (const auto& zone : map.conflict_zones) {
    std::vector<detail::zone_visit> visits;
    for (const auto& traj : data.trajectories) {
      const auto occ = detail::zone_occupancy(traj, zone);
      if (!occ) continue;
      // approach lane: last lane matched strictly before entering the zone
      const auto matches = map_match(traj, map);
      std::string lane;
      for (std::size_t i = 0; i < traj.states.size() && traj.states[i].t < occ->first; ++i)
        if (matches[i].lane_id) lane = *matches[i].lane_id;
      if (lane != zone.lane_pair.first && lane != zone.lane_pair.second) continue;
      visits.push_back({&traj, lane, occ->first, occ->second});
    }
    std::sort(visits.begin(), visits.end(),
              [](const auto& a, const auto& b) { return a.t_entry < b.t_entry; });

    for (const auto& violator : visits) {
      if (violator.approach_lane == zone.priority_lane) continue;
      for (const auto& holder : visits) {
        if (holder.traj == violator.traj || holder.approach_lane != zone.priority_lane) continue;
        if (holder.t_entry <= violator.t_entry) continue;  // order respected

        // proximity gate: holder's projected arrival at violator entry time
        const double t0 = violator.t_entry;
        if (t0 < holder.traj->start_time() || t0 > holder.traj->end_time()) continue;
        const vec2 pos = holder.traj->position_at(t0);
        const double speed = holder.traj->velocity_at(t0).norm();
        const double dist = detail::distance_to_polygon(pos, zone.polygon);
        const double t_arrive = speed > 0.5 ? dist / speed : std::numeric_limits<double>::infinity();
        if (t_arrive > cfg.ttce_gate) continue;

        // reaction gate: forced yield braking or critical ttc in the window
        const double t1 = std::min(holder.t_entry, t0 + cfg.ttce_gate);
        bool yielded = false;
        for (const auto& s : holder.traj->states) {
          if (s.t < t0 || s.t > t1) continue;
          if (s.accel_lon && *s.accel_lon < -cfg.a_yield) {
            yielded = true;
            break;
          }
        }
        if (!yielded) {
          for (const auto& pair : pairs) {
            if (pair.id_a != violator.traj->id || pair.id_b != holder.traj->id) continue;
            for (const auto& step : pair.steps)
              if (step.t >= t0 && step.t <= t1 && step.ttc && *step.ttc < cfg.ttc_crit) {
                yielded = true;
                break;
              }
          }
        }
        if (!yielded) continue;

        detection d;
        d.ego_id = violator.traj->id;
        d.other_ids = {holder.traj->id};
        d.t_start = violator.t_entry;
        d.t_end = violator.t_exit;
        d.kind = detector_kind::priority_violation;
        d.severity = cfg.ttce_gate / std::max(t_arrive, 1e-3);
        d.evidence["holder_arrival_s"] = t_arrive;
        d.required_data = column_class::ego_others_environment;
        d.candidate_stages = {row_stage::perception, row_stage::goal_risk_tolerance,
                              row_stage::knowledge};
        d.uses_map_evidence = true;
        out.push_back(std::move(d));
      }
    }
  }
  return out;
}

/// Recording-artifact checks on the raw (unresampled) trajectory: timestamp
/// gaps, physically impossible jumps, and isolated innovation spikes.
inline std::vector<detection> detect_recording_artifacts(const trajectory& traj,
                                                         const detector_config& cfg = {}) {
  const std::size_t n = traj.states.size();
  std::vector<double> dts;
  dts.reserve(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) dts.push_back(traj.states[i + 1].t - traj.states[i].t);
  std::vector<double> sorted_dts = dts;
  std::nth_element(sorted_dts.begin(), sorted_dts.begin() + static_cast<long>(sorted_dts.size() / 2),
                   sorted_dts.end());
  const double median_dt = sorted_dts[sorted_dts.size() / 2];

  std::vector<detection> out;
  const auto artifact = [&](detector_kind kind, std::size_t i, double severity,
                            const char* key, double value) {
    detection d;
    d.ego_id = traj.id;
    d.t_start = traj.states[i].t;
    d.t_end = traj.states[i + 1].t;
    d.kind = kind;
    d.severity = severity;
    d.evidence[key] = value;
    d.required_data = column_class::ego_trajectory;
    d.candidate_stages = {row_stage::trajectory_recording};
    return d;
  };

  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (dts[i] > cfg.gap_factor * median_dt)
      out.push_back(artifact(detector_kind::dropout, i, dts[i] / median_dt, "gap_s", dts[i]));
    const double implied =
        (traj.states[i + 1].position() - traj.states[i].position()).norm() / dts[i];
    if (implied > cfg.v_phys)
      out.push_back(
          artifact(detector_kind::teleport, i, implied / cfg.v_phys, "implied_speed", implied));
  }

  // isolated innovation spikes against a permissive reference model
  try {
    dynamics_model dyn;
    dyn.dt = median_dt;
    dyn.process_noise_x = dyn.process_noise_y = cfg.artifact_process_noise;
    measurement_model meas;
    meas.position_noise_std = cfg.artifact_measurement_std;
    const auto res = filter(dyn, meas, traj);
    const auto score = anomaly_score(dyn, meas, traj);
    const auto& per_step = score.per_step;
    std::size_t i = 0;
    while (i < per_step.size()) {
      if (per_step[i] <= cfg.burst_threshold) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < per_step.size() && per_step[j + 1] > cfg.burst_threshold) ++j;
      if (j - i + 1 <= cfg.burst_max_run) {
        double peak = 0.0;
        for (std::size_t k = i; k <= j; ++k) peak = std::max(peak, per_step[k]);
        const double t0 = traj.start_time();
        detection d;
        d.ego_id = traj.id;
        d.t_start = t0 + static_cast<double>(res.innovations[i].step) * median_dt;
        d.t_end = t0 + static_cast<double>(res.innovations[j].step) * median_dt;
        d.kind = detector_kind::noise_spike;
        d.severity = peak / cfg.burst_threshold;
        d.evidence["peak_nis"] = peak;
        d.required_data = column_class::ego_trajectory;
        d.candidate_stages = {row_stage::trajectory_recording};
        out.push_back(std::move(d));
      }
      i = j + 1;
    }
  } catch (const non_uniform_sampling&) {
    // spike check needs a usable grid; gap/teleport rules above still apply
  } catch (const singular_covariance&) {
  }
  return out;
}

/// Map-diff check used with synthetic ground truth: signs present in the
/// reference map but absent from the dataset's map. A real detector cannot
/// observe a missing sign; this backs the static-environment row in tests.
inline std::vector<detection> detect_map_diff(const environment_map& reference,
                                              const environment_map& observed,
                                              double span_start, double span_end) {
  std::vector<detection> out;
  for (const auto& sign : reference.signs) {
    bool found = false;
    for (const auto& other : observed.signs)
      if (other.id == sign.id) found = true;
    if (found) continue;
    detection d;
    d.ego_id = "map";
    d.t_start = span_start;
    d.t_end = span_end;
    d.kind = detector_kind::missing_sign;
    d.severity = 1.0;
    d.required_data = column_class::ego_environment;
    d.candidate_stages = {row_stage::static_environment_info};
    d.uses_map_evidence = true;
    out.push_back(std::move(d));
  }
  return out;
}

/// kNN density anomaly score of one trajectory within a dataset: mean
/// distance to the k nearest start-pose-normalized feature vectors, divided
/// by the dataset's median kNN distance. Values above one are rarer than
/// typical.
inline double score_density_anomaly(const trajectory& traj, const dataset& data,
                                    const detector_config& cfg = {}) {
  const std::size_t k = cfg.density_k;
  if (data.trajectories.size() < k + 1)
    throw dataset_too_small(data.trajectories.size(), k + 1);

  const std::size_t L = cfg.density_samples;
  const auto featurize = [L](const trajectory& t) {
    std::vector<double> f;
    f.reserve(3 * L);
    const double t0 = t.start_time(), t1 = t.end_time();
    const vec2 origin = t.states.front().position();
    // rotation from the initial motion direction
    vec2 dir{1.0, 0.0};
    for (const auto& s : t.states) {
      const vec2 d = s.position() - origin;
      if (d.norm() > 0.5) {
        dir = d.normalized();
        break;
      }
    }
    const double c = dir.x, s_ = dir.y;
    vec2 prev{};
    for (std::size_t i = 0; i < L; ++i) {
      const double tt = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(L - 1);
      const vec2 p = t.position_at(tt) - origin;
      const vec2 q{c * p.x + s_ * p.y, -s_ * p.x + c * p.y};
      f.push_back(q.x);
      f.push_back(q.y);
      const double dt_seg = (t1 - t0) / static_cast<double>(L - 1);
      f.push_back(i == 0 ? 0.0 : (q - prev).norm() / dt_seg);
      prev = q;
    }
    return f;
  };

  std::vector<std::vector<double>> features;
  features.reserve(data.trajectories.size());
  std::size_t self_index = data.trajectories.size();
  for (std::size_t i = 0; i < data.trajectories.size(); ++i) {
    features.push_back(featurize(data.trajectories[i]));
    if (data.trajectories[i].id == traj.id) self_index = i;
  }
  std::vector<double> self_feature =
      self_index < features.size() ? features[self_index] : featurize(traj);

  const auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  };

  const auto knn_mean = [&](const std::vector<double>& f, std::size_t skip) {
    std::vector<double> d;
    d.reserve(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (i == skip) continue;
      d.push_back(dist(f, features[i]));
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<long>(k), d.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += d[i];
    return sum / static_cast<double>(k);
  };

  std::vector<double> all_scores;
  all_scores.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) all_scores.push_back(knn_mean(features[i], i));
  std::vector<double> sorted = all_scores;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2),
                   sorted.end());
  const double median = std::max(sorted[sorted.size() / 2], 1e-9);

  const double own = self_index < features.size() ? all_scores[self_index]
                                                  : knn_mean(self_feature, features.size());
  return own / median;
}

}  // namespace ccm

#endif  // CCMINER_DETECTORS_HPP_
