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

#ifndef CCMINER_ENVIRONMENT_HPP_
#define CCMINER_ENVIRONMENT_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ccminer/errors.hpp"
#include "ccminer/geometry.hpp"
#include "ccminer/trajectory.hpp"

namespace ccm {

struct lane_segment {
  std::string id;
  polyline centerline;  // point order implies travel direction
  double width = 3.5;          // meters
  double speed_limit = 13.89;  // m/s
  std::optional<std::string> oncoming_lane_id;
};

enum class sign_kind { priority, yield, stop, no_u_turn, one_way, speed_limit };

inline const char* to_string(sign_kind k) {
  switch (k) {
    case sign_kind::priority: return "priority";
    case sign_kind::yield: return "yield";
    case sign_kind::stop: return "stop";
    case sign_kind::no_u_turn: return "no_u_turn";
    case sign_kind::one_way: return "one_way";
    default: return "speed_limit";
  }
}

inline std::optional<sign_kind> sign_kind_from(const std::string& s) {
  if (s == "priority") return sign_kind::priority;
  if (s == "yield") return sign_kind::yield;
  if (s == "stop") return sign_kind::stop;
  if (s == "no_u_turn") return sign_kind::no_u_turn;
  if (s == "one_way") return sign_kind::one_way;
  if (s == "speed_limit") return sign_kind::speed_limit;
  return std::nullopt;
}

struct traffic_sign {
  std::string id;
  sign_kind kind = sign_kind::priority;
  double value = 0.0;  // m/s, only meaningful for speed_limit
  vec2 position;
  std::vector<std::string> applies_to;  // lane ids, non-empty
};

struct virtual_loop {
  std::string id;
  vec2 gate_a;
  vec2 gate_b;
  std::string label;  // convention: "<approach>-entry" / "<approach>-exit"
};

struct conflict_zone {
  std::string id;
  std::vector<vec2> polygon;  // simple, >= 3 vertices
  std::pair<std::string, std::string> lane_pair;
  std::string priority_lane;  // must be one of lane_pair
};

struct environment_map {
  std::vector<lane_segment> lanes;
  std::vector<traffic_sign> signs;
  std::vector<virtual_loop> loops;
  std::vector<conflict_zone> conflict_zones;

  const lane_segment* find_lane(const std::string& id) const {
    for (const auto& l : lanes)
      if (l.id == id) return &l;
    return nullptr;
  }
  const virtual_loop* find_loop(const std::string& label_or_id) const {
    for (const auto& l : loops)
      if (l.id == label_or_id || l.label == label_or_id) return &l;
    return nullptr;
  }
};

enum class crossing_direction { left_to_right, right_to_left };

struct loop_crossing {
  double t_cross;  // linearly interpolated
  crossing_direction direction;
};

/// Intersections of the trajectory polyline with a gate segment, one event
/// per proper crossing. A trajectory vertex landing exactly on the gate
/// counts once, attributed to the earlier motion segment; collinear sliding
/// along the gate produces no event. Direction follows the sign of
/// cross(gate direction, motion direction): negative is right_to_left.
inline std::vector<loop_crossing> loop_crossings(const trajectory& traj, const virtual_loop& loop) {
  std::vector<loop_crossing> out;
  const vec2 a = loop.gate_a, b = loop.gate_b;
  for (std::size_t i = 0; i + 1 < traj.states.size(); ++i) {
    const vec2 c = traj.states[i].position();
    const vec2 d = traj.states[i + 1].position();
    const double d0 = orient(a, b, c);
    const double d1 = orient(a, b, d);
    if (d0 == 0.0 && d1 == 0.0) continue;  // collinear slide
    if (d0 == 0.0) continue;               // counted by the previous segment
    if (!((d0 > 0.0 && d1 <= 0.0) || (d0 < 0.0 && d1 >= 0.0))) continue;
    // the crossing point must lie within the gate's extent
    const double e0 = orient(c, d, a);
    const double e1 = orient(c, d, b);
    if (e0 * e1 > 0.0) continue;
    if (e0 == 0.0 && e1 == 0.0) continue;
    const double s = d0 / (d0 - d1);
    const double t_cross = traj.states[i].t + s * (traj.states[i + 1].t - traj.states[i].t);
    const double cr = (b - a).cross(d - c);
    out.push_back({t_cross, cr < 0.0 ? crossing_direction::right_to_left
                                     : crossing_direction::left_to_right});
  }
  return out;
}

struct lane_match {
  std::optional<std::string> lane_id;
  double lateral_offset = 0.0;     // meters, signed (left of travel positive)
  double heading_deviation = 0.0;  // radians in (-pi, pi]
  double arc_length = 0.0;         // along the matched centerline
  double lane_curvature = 0.0;     // centerline curvature at the match point
};

/// Extra corridor slack beyond width/2 that absorbs measurement noise.
inline constexpr double kMatchToleranceMeters = 2.0;

/// Per-state nearest-lane assignment. A state matches the closest lane whose
/// corridor (width/2 + tolerance) contains it; exact distance ties go to the
/// lexicographically lower lane id.
inline std::vector<lane_match> map_match(const trajectory& traj, const environment_map& map,
                                         double tolerance = kMatchToleranceMeters) {
  if (map.lanes.empty()) throw empty_map();
  std::vector<lane_match> out;
  out.reserve(traj.states.size());
  for (const auto& s : traj.states) {
    lane_match best;
    double best_dist = std::numeric_limits<double>::infinity();
    const lane_segment* best_lane = nullptr;
    for (const auto& lane : map.lanes) {
      const auto proj = lane.centerline.project(s.position());
      if (proj.distance > lane.width / 2.0 + tolerance) continue;
      const bool closer = proj.distance < best_dist - 1e-9;
      const bool tied = std::abs(proj.distance - best_dist) <= 1e-9;
      if (closer || (tied && best_lane && lane.id < best_lane->id)) {
        best_dist = proj.distance;
        best_lane = &lane;
        best.lateral_offset = proj.signed_offset;
        best.arc_length = proj.arc_length;
      }
    }
    if (best_lane) {
      best.lane_id = best_lane->id;
      best.heading_deviation =
          wrap_angle(s.heading - best_lane->centerline.heading_at(best.arc_length));
      best.lane_curvature = best_lane->centerline.curvature_at(best.arc_length);
    }
    out.push_back(best);
  }
  return out;
}

enum class priority_kind { priority, yield, stop, unregulated };

inline const char* to_string(priority_kind k) {
  switch (k) {
    case priority_kind::priority: return "priority";
    case priority_kind::yield: return "yield";
    case priority_kind::stop: return "stop";
    default: return "unregulated";
  }
}

struct lane_rules {
  double speed_limit = 0.0;  // m/s
  bool u_turn_allowed = true;
  priority_kind priority = priority_kind::unregulated;
};

/// Folds the applicable signs onto a lane. Multiple speed limits resolve to
/// the lowest; stop dominates yield dominates priority.
inline lane_rules rules_at(const std::string& lane_id, const environment_map& map) {
  const lane_segment* lane = map.find_lane(lane_id);
  if (!lane) throw unknown_lane(lane_id);
  lane_rules rules;
  rules.speed_limit = lane->speed_limit;
  bool saw_sign_limit = false;
  for (const auto& sign : map.signs) {
    if (std::find(sign.applies_to.begin(), sign.applies_to.end(), lane_id) ==
        sign.applies_to.end())
      continue;
    switch (sign.kind) {
      case sign_kind::speed_limit:
        rules.speed_limit = saw_sign_limit ? std::min(rules.speed_limit, sign.value) : sign.value;
        saw_sign_limit = true;
        break;
      case sign_kind::no_u_turn:
        rules.u_turn_allowed = false;
        break;
      case sign_kind::stop:
        rules.priority = priority_kind::stop;
        break;
      case sign_kind::yield:
        if (rules.priority != priority_kind::stop) rules.priority = priority_kind::yield;
        break;
      case sign_kind::priority:
        if (rules.priority == priority_kind::unregulated) rules.priority = priority_kind::priority;
        break;
      case sign_kind::one_way:
        break;  // direction already implied by centerline order
    }
  }
  return rules;
}

}  // namespace ccm

#endif  // CCMINER_ENVIRONMENT_HPP_
