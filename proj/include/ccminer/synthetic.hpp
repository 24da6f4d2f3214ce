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

#ifndef CCMINER_SYNTHETIC_HPP_
#define CCMINER_SYNTHETIC_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ccminer/detectors.hpp"
#include "ccminer/environment.hpp"
#include "ccminer/errors.hpp"
#include "ccminer/geometry.hpp"
#include "ccminer/trajectory.hpp"

namespace ccm {

enum class map_template { straight_2lane, curve, four_way_intersection };

inline const char* to_string(map_template t) {
  switch (t) {
    case map_template::straight_2lane: return "straight_2lane";
    case map_template::curve: return "curve";
    default: return "four_way_intersection";
  }
}

inline std::optional<map_template> map_template_from(const std::string& s) {
  if (s == "straight_2lane") return map_template::straight_2lane;
  if (s == "curve") return map_template::curve;
  if (s == "four_way_intersection") return map_template::four_way_intersection;
  return std::nullopt;
}

struct scenario_spec {
  map_template tmpl = map_template::straight_2lane;
  double curve_radius = 40.0;  // meters, curve template only
  double speed_limit = 10.0;   // m/s, applied to every lane
  std::size_t n_vehicles = 1;
  double duration = 60.0;  // seconds
  double dt = 0.1;         // seconds
  double stagger = 8.0;    // seconds between vehicle entries
  std::uint64_t seed = 0;
};

enum class injection_kind {
  harsh_brake,
  curve_overspeed,
  tailgate,
  near_collision_cross,
  wrong_way,
  u_turn,
  cutting_corner,
  priority_violation,
  recording_noise,
  recording_dropout,
  missing_sign,
};

inline const char* to_string(injection_kind k) {
  switch (k) {
    case injection_kind::harsh_brake: return "harsh_brake";
    case injection_kind::curve_overspeed: return "curve_overspeed";
    case injection_kind::tailgate: return "tailgate";
    case injection_kind::near_collision_cross: return "near_collision_cross";
    case injection_kind::wrong_way: return "wrong_way";
    case injection_kind::u_turn: return "u_turn";
    case injection_kind::cutting_corner: return "cutting_corner";
    case injection_kind::priority_violation: return "priority_violation";
    case injection_kind::recording_noise: return "recording_noise";
    case injection_kind::recording_dropout: return "recording_dropout";
    default: return "missing_sign";
  }
}

inline std::optional<injection_kind> injection_kind_from(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(injection_kind::missing_sign); ++i) {
    const auto k = static_cast<injection_kind>(i);
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

struct injection_spec {
  injection_kind kind = injection_kind::harsh_brake;
  std::size_t target = 0;  // vehicle index; ignored by missing_sign
  double onset = 0.0;      // seconds after the target's first timestamp; <= 0 auto
  std::map<std::string, double> params;
  std::string aux;  // lane or sign id for wrong_way / missing_sign
};

/// What an injection promises the detector battery will find.
struct ground_truth_item {
  injection_kind source = injection_kind::harsh_brake;
  detector_kind expected = detector_kind::harsh_longitudinal;
  std::string ego_id;
  double t_start = 0.0;
  double t_end = 0.0;
  column_class column = column_class::ego_trajectory;
  std::set<row_stage> stages;
};

struct scenario_world {
  dataset data;
  environment_map map;
};

namespace detail {

struct sim_route {
  polyline path;
  double limit = 10.0;
};

struct world_geometry {
  environment_map map;
  std::vector<sim_route> routes;
  std::vector<std::size_t> route_order;  // vehicle i drives routes[order[i % size]]
};

inline std::vector<vec2> line_points(vec2 a, vec2 b, double step = 10.0) {
  const double len = (b - a).norm();
  const auto n = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(len / step)) + 1);
  std::vector<vec2> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n - 1);
    pts.push_back(a + (b - a) * u);
  }
  return pts;
}

inline std::vector<vec2> offset_left(const std::vector<vec2>& pts, double d) {
  std::vector<vec2> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const vec2 before = pts[i > 0 ? i - 1 : 0];
    const vec2 after = pts[i + 1 < pts.size() ? i + 1 : pts.size() - 1];
    out[i] = pts[i] + (after - before).normalized().perp() * d;
  }
  return out;
}

inline std::vector<vec2> reversed(std::vector<vec2> pts) {
  std::reverse(pts.begin(), pts.end());
  return pts;
}

inline std::vector<vec2> concat(std::initializer_list<std::vector<vec2>> parts) {
  std::vector<vec2> out;
  for (const auto& part : parts)
    for (const auto& p : part) {
      if (!out.empty() && (p - out.back()).norm() < 1e-9) continue;
      out.push_back(p);
    }
  return out;
}

inline vec2 rot90(vec2 p, int k) {
  for (int i = 0; i < ((k % 4) + 4) % 4; ++i) p = {-p.y, p.x};
  return p;
}

inline std::vector<vec2> rot90(std::vector<vec2> pts, int k) {
  for (auto& p : pts) p = rot90(p, k);
  return pts;
}

inline world_geometry build_straight(const scenario_spec& spec) {
  world_geometry w;
  const auto a_pts = line_points({0.0, -1.75}, {400.0, -1.75});
  const auto b_pts = reversed(offset_left(a_pts, 3.5));
  lane_segment a{"a", polyline(a_pts), 3.5, spec.speed_limit, "b"};
  lane_segment b{"b", polyline(b_pts), 3.5, spec.speed_limit, "a"};
  w.map.lanes = {a, b};
  w.routes = {{a.centerline, spec.speed_limit}, {b.centerline, spec.speed_limit}};
  w.route_order = {0, 0, 1, 1};
  return w;
}

inline world_geometry build_curve(const scenario_spec& spec) {
  world_geometry w;
  const double r = spec.curve_radius;
  // straight lead-in, quarter arc turning left, straight lead-out
  const auto a_pts = concat({line_points({0.0, 0.0}, {150.0, 0.0}, 5.0),
                             sample_arc({150.0, r}, r, -std::numbers::pi / 2.0,
                                        std::numbers::pi / 2.0, 0.5),
                             line_points({150.0 + r, r}, {150.0 + r, r + 150.0}, 5.0)});
  const auto b_pts = reversed(offset_left(a_pts, 3.5));
  lane_segment a{"a", polyline(a_pts), 3.5, spec.speed_limit, "b"};
  lane_segment b{"b", polyline(b_pts), 3.5, spec.speed_limit, "a"};
  w.map.lanes = {a, b};
  w.routes = {{a.centerline, spec.speed_limit}, {b.centerline, spec.speed_limit}};
  // nominal traffic is one-directional: constant-velocity extrapolation of two
  // opposing curved paths crosses ahead and would fake criticality
  w.route_order = {0};
  return w;
}

inline world_geometry build_intersection(const scenario_spec& spec) {
  world_geometry w;
  const char* names[4] = {"west", "south", "east", "north"};
  const std::vector<vec2> in_base = line_points({-200.0, -1.75}, {-10.0, -1.75});
  const std::vector<vec2> out_base = line_points({-10.0, 1.75}, {-200.0, 1.75});

  for (int k = 0; k < 4; ++k) {
    lane_segment in{std::string(names[k]) + "_in", polyline(rot90(in_base, k)), 3.5,
                    spec.speed_limit, std::string(names[k]) + "_out"};
    lane_segment out{std::string(names[k]) + "_out", polyline(rot90(out_base, k)), 3.5,
                     spec.speed_limit, std::string(names[k]) + "_in"};
    w.map.lanes.push_back(in);
    w.map.lanes.push_back(out);
  }

  // priority road runs west-east; the crossing road yields
  w.map.signs.push_back({"sign_priority_west", sign_kind::priority, 0.0, {-12.0, -4.0},
                         {"west_in"}});
  w.map.signs.push_back({"sign_priority_east", sign_kind::priority, 0.0, {12.0, 4.0},
                         {"east_in"}});
  w.map.signs.push_back({"sign_yield_north", sign_kind::yield, 0.0, {-4.0, 12.0}, {"north_in"}});
  w.map.signs.push_back({"sign_yield_south", sign_kind::yield, 0.0, {4.0, -12.0}, {"south_in"}});
  w.map.signs.push_back({"sign_no_u_turn_west", sign_kind::no_u_turn, 0.0, {-12.0, -4.0},
                         {"west_in"}});

  w.map.loops.push_back({"loop_west_entry", {-15.0, -3.5}, {-15.0, 0.0}, "west-entry"});
  w.map.loops.push_back({"loop_west_exit", {-15.0, 0.0}, {-15.0, 3.5}, "west-exit"});

  conflict_zone zone;
  zone.id = "cz_west_north";
  zone.polygon = {{-4.75, -4.75}, {1.25, -4.75}, {1.25, 1.25}, {-4.75, 1.25}};
  zone.lane_pair = {"west_in", "north_in"};
  zone.priority_lane = "west_in";
  w.map.conflict_zones.push_back(zone);

  // base (west) routes; the other approaches are rotations
  const auto through = concat({in_base, line_points({-10.0, -1.75}, {10.0, -1.75}, 5.0),
                               rot90(out_base, 2)});
  const auto right = concat({in_base,
                             sample_arc({-10.0, -10.0}, 8.25, std::numbers::pi / 2.0,
                                        -std::numbers::pi / 2.0, 0.5),
                             rot90(out_base, 1)});
  const auto left = concat({in_base,
                            sample_arc({-10.0, 10.0}, 11.75, -std::numbers::pi / 2.0,
                                       std::numbers::pi / 2.0, 0.5),
                            rot90(out_base, 3)});
  for (int k = 0; k < 4; ++k) {
    w.routes.push_back({polyline(rot90(through, k)), spec.speed_limit});
    w.routes.push_back({polyline(rot90(right, k)), spec.speed_limit});
    w.routes.push_back({polyline(rot90(left, k)), spec.speed_limit});
  }
  // alternate approaches before repeating maneuvers
  w.route_order = {0, 9, 6, 3, 1, 10, 7, 4, 2, 11, 8, 5};
  return w;
}

inline world_geometry build_template(const scenario_spec& spec) {
  switch (spec.tmpl) {
    case map_template::straight_2lane: return build_straight(spec);
    case map_template::curve: return build_curve(spec);
    default: return build_intersection(spec);
  }
}

/// Comfort bounds used by the nominal driver; all far inside the detector
/// thresholds so clean traffic scores zero findings.
struct comfort_limits {
  double a_lat = 2.5;   // m/s^2
  double brake = 1.5;   // m/s^2
  double accel = 1.2;   // m/s^2
};

/// Curvature-aware speed envelope over arc length, sampled every ds. The
/// backward pass enforces comfortable deceleration into curves, the forward
/// pass comfortable acceleration out of them, so tracking the envelope keeps
/// every kinematic quantity inside the comfort band by construction.
struct speed_envelope {
  double ds = 0.5;
  std::vector<double> v;

  double at(double s) const {
    if (v.empty()) return 0.0;
    const double u = std::clamp(s / ds, 0.0, static_cast<double>(v.size() - 1));
    const auto i = static_cast<std::size_t>(u);
    if (i + 1 >= v.size()) return v.back();
    return v[i] + (v[i + 1] - v[i]) * (u - static_cast<double>(i));
  }
};

inline speed_envelope make_envelope(const polyline& path, double limit,
                                    const comfort_limits& c = {}, double ds = 0.5) {
  speed_envelope env;
  env.ds = ds;
  const auto m = static_cast<std::size_t>(std::ceil(path.length() / ds)) + 1;
  env.v.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double s = std::min(static_cast<double>(i) * ds, path.length());
    const double kappa = std::abs(path.curvature_at(s));
    env.v[i] = kappa > 1e-9 ? std::min(limit, std::sqrt(c.a_lat / kappa)) : limit;
  }
  for (std::size_t i = m - 1; i-- > 0;)
    env.v[i] = std::min(env.v[i], std::sqrt(env.v[i + 1] * env.v[i + 1] + 2.0 * c.brake * ds));
  for (std::size_t i = 1; i < m; ++i)
    env.v[i] = std::min(env.v[i], std::sqrt(env.v[i - 1] * env.v[i - 1] + 2.0 * c.accel * ds));
  return env;
}

inline double smoothstep01(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

struct sim_vehicle {
  std::size_t route_idx = 0;
  std::size_t k0 = 0;            // global grid step of the first state
  std::vector<double> s_series;  // arc length per step
};

}  // namespace detail

/// Deterministic nominal traffic: vehicles enter their route staggered in
/// time and track the comfort speed envelope, bounded below by an IDM-style
/// car-following law toward the nearest leader on the same route.
inline scenario_world generate_nominal(const scenario_spec& spec) {
  if (spec.n_vehicles < 1) throw infeasible_spec("n_vehicles must be >= 1");
  if (!(spec.dt > 0.0)) throw invalid_step(spec.dt);
  if (!(spec.duration > 2.0 * spec.dt)) throw infeasible_spec("duration too short");

  auto geo = detail::build_template(spec);
  std::mt19937_64 rng(spec.seed);

  std::vector<detail::speed_envelope> envelopes;
  envelopes.reserve(geo.routes.size());
  for (const auto& r : geo.routes) envelopes.push_back(detail::make_envelope(r.path, r.limit));

  // IDM parameters (desired speed is the lane limit)
  const double idm_a = 1.2, idm_b = 2.0, idm_t = 1.5, idm_s0 = 2.0, veh_len = 5.0;

  scenario_world world;
  world.map = geo.map;
  world.data.metadata["template"] = to_string(spec.tmpl);
  world.data.metadata["seed"] = std::to_string(spec.seed);

  std::vector<detail::sim_vehicle> vehicles;
  const auto n_steps = static_cast<std::size_t>(std::floor(spec.duration / spec.dt + 1e-9)) + 1;

  for (std::size_t i = 0; i < spec.n_vehicles; ++i) {
    const auto jitter = static_cast<double>(rng() % 21) * spec.dt;
    const double t_start = static_cast<double>(i) * spec.stagger + jitter;
    if (t_start > spec.duration - 2.0 * spec.dt)
      throw infeasible_spec("vehicle " + std::to_string(i) + " does not fit into the duration");

    detail::sim_vehicle veh;
    veh.route_idx = geo.route_order[i % geo.route_order.size()];
    veh.k0 = static_cast<std::size_t>(std::llround(t_start / spec.dt));
    const auto& route = geo.routes[veh.route_idx];
    const auto& env = envelopes[veh.route_idx];

    double s = 0.0;
    double v = env.at(0.0);
    for (std::size_t k = veh.k0; k < n_steps && s < route.path.length() - 1e-9; ++k) {
      veh.s_series.push_back(s);

      // nearest leader ahead on the same route
      std::optional<double> s_lead, v_lead;
      for (const auto& other : vehicles) {
        if (other.route_idx != veh.route_idx) continue;
        if (k < other.k0 || k >= other.k0 + other.s_series.size()) continue;
        const double so = other.s_series[k - other.k0];
        if (so <= s || (s_lead && so >= *s_lead)) continue;
        s_lead = so;
        const std::size_t j = k - other.k0;
        v_lead = j + 1 < other.s_series.size()
                     ? (other.s_series[j + 1] - other.s_series[j]) / spec.dt
                     : v;
      }

      double v_next = env.at(s + v * spec.dt);
      if (s_lead) {
        const double gap = std::max(*s_lead - s - veh_len, 0.1);
        const double s_star =
            idm_s0 + v * idm_t + v * (v - *v_lead) / (2.0 * std::sqrt(idm_a * idm_b));
        const double free = std::pow(v / std::max(route.limit, 0.1), 4.0);
        const double a_idm =
            std::clamp(idm_a * (1.0 - free - (s_star / gap) * (s_star / gap)), -2.0, idm_a);
        v_next = std::min(v_next, std::max(v + a_idm * spec.dt, 0.0));
      }
      s += 0.5 * (v + v_next) * spec.dt;
      v = v_next;
    }
    if (veh.s_series.size() < 2)
      throw infeasible_spec("vehicle " + std::to_string(i) + " yields fewer than two states");

    trajectory traj;
    char id[16];
    std::snprintf(id, sizeof(id), "veh_%03zu", i);
    traj.id = id;
    traj.states.reserve(veh.s_series.size());
    for (std::size_t j = 0; j < veh.s_series.size(); ++j) {
      state st;
      st.t = static_cast<double>(veh.k0 + j) * spec.dt;
      const vec2 p = route.path.at(veh.s_series[j]);
      st.x = p.x;
      st.y = p.y;
      st.heading = route.path.heading_at(veh.s_series[j]);
      traj.states.push_back(st);
    }
    world.data.trajectories.push_back(std::move(traj));
    vehicles.push_back(std::move(veh));
  }
  return world;
}

namespace detail {

/// Re-integrates a trajectory along a path under a longitudinal acceleration
/// schedule a(t, v). Keeps the original time grid; truncates at the path end.
template <typename AccelFn>
trajectory rebuild_speed(const trajectory& orig, const polyline& path, double v0, AccelFn accel) {
  const double dt = orig.states[1].t - orig.states[0].t;
  trajectory out;
  out.id = orig.id;
  out.user_class = orig.user_class;
  double s = 0.0, v = v0;
  for (double t = orig.start_time(); t <= orig.end_time() + 1e-9 && s < path.length() - 1e-9;
       t += dt) {
    state st;
    st.t = t;
    const vec2 p = path.at(s);
    st.x = p.x;
    st.y = p.y;
    st.heading = path.heading_at(s);
    out.states.push_back(st);
    const double v_next = std::max(v + accel(t, v) * dt, 0.0);
    s += 0.5 * (v + v_next) * dt;
    v = v_next;
  }
  if (out.states.size() < 2) throw infeasible_spec("rebuilt trajectory too short");
  return out;
}

inline double initial_speed(const trajectory& traj) {
  return (traj.states[1].position() - traj.states[0].position()).norm() /
         (traj.states[1].t - traj.states[0].t);
}

inline polyline recorded_path(const trajectory& traj) {
  std::vector<vec2> pts;
  pts.reserve(traj.states.size());
  for (const auto& s : traj.states) {
    if (!pts.empty() && (s.position() - pts.back()).norm() < 1e-9) continue;
    pts.push_back(s.position());
  }
  return polyline(std::move(pts));
}

inline double param(const injection_spec& inj, const std::string& key, double fallback) {
  const auto it = inj.params.find(key);
  return it == inj.params.end() ? fallback : it->second;
}

inline double snap_to_grid(double value, double dt) {
  return std::round(value / dt) * dt;
}

}  // namespace detail

struct injection_result {
  dataset data;
  environment_map map;
  std::vector<ground_truth_item> truth;
};

/// Applies the requested surgeries to a nominal world. Every injection emits
/// one ground-truth item naming the detector it must trip, with an interval
/// computed from the commanded profile (not from running any detector).
inline injection_result inject(const dataset& data, const environment_map& map,
                               const std::vector<injection_spec>& injections,
                               const detector_config& cfg = {}) {
  injection_result out;
  out.data = data;
  out.map = map;

  std::set<std::size_t> touched;
  for (const auto& inj : injections) {
    if (inj.kind != injection_kind::missing_sign) {
      if (inj.target >= out.data.trajectories.size())
        throw unknown_target(std::to_string(inj.target));
      if (!touched.insert(inj.target).second)
        throw conflicting_injections(std::to_string(inj.target));
    }
  }

  for (const auto& inj : injections) {
    ground_truth_item gt;
    gt.source = inj.kind;

    switch (inj.kind) {
      case injection_kind::harsh_brake: {
        trajectory& target = out.data.trajectories[inj.target];
        const double dt = target.states[1].t - target.states[0].t;
        const polyline path = detail::recorded_path(target);
        const double v0 = detail::initial_speed(target);
        const double onset = target.start_time() + (inj.onset > 0.0 ? inj.onset : 12.0);
        const double peak = detail::param(inj, "a_peak", 8.0);
        const double ramp = detail::param(inj, "ramp", 0.6);
        const double hold = detail::param(inj, "hold", 0.5);
        const auto schedule = [&](double t) {
          const double tau = t - onset;
          if (tau < 0.0) return 0.0;
          if (tau < ramp) return -peak * tau / ramp;
          if (tau < ramp + hold) return -peak;
          if (tau < 2.0 * ramp + hold) return -peak * (1.0 - (tau - ramp - hold) / ramp);
          return 0.0;
        };
        target = detail::rebuild_speed(target, path, v0, [&](double t, double v) {
          const double a = schedule(t);
          return v + a * dt < 0.3 ? (0.3 - v) / dt : a;
        });
        double first = -1.0, last = -1.0;
        for (const auto& s : target.states) {
          if (std::abs(schedule(s.t)) <= cfg.a_brake) continue;
          if (first < 0.0) first = s.t;
          last = s.t;
        }
        gt.expected = detector_kind::harsh_longitudinal;
        gt.ego_id = target.id;
        gt.t_start = first;
        gt.t_end = last;
        gt.column = column_class::ego_trajectory;
        gt.stages = {row_stage::perception, row_stage::goal_risk_tolerance};
        break;
      }

      case injection_kind::curve_overspeed: {
        trajectory& target = out.data.trajectories[inj.target];
        const double dt = target.states[1].t - target.states[0].t;
        const polyline path = detail::recorded_path(target);
        const double v0 = detail::initial_speed(target);
        const double v_target = detail::param(inj, "speed", 10.95);
        target = detail::rebuild_speed(target, path, v0, [&](double, double v) {
          return std::clamp((v_target - v) / dt, -1.5, 1.2);
        });
        // replay the arc-length profile to pin where lateral accel exceeds
        double s = 0.0, v = v0, first = -1.0, last = -1.0;
        for (const auto& st : target.states) {
          const double a_lat = v * v * std::abs(path.curvature_at(s));
          if (a_lat > cfg.a_lat_max) {
            if (first < 0.0) first = st.t;
            last = st.t;
          }
          const double v_next = std::max(v + std::clamp((v_target - v) / dt, -1.5, 1.2) * dt, 0.0);
          s += 0.5 * (v + v_next) * dt;
          v = v_next;
        }
        if (first < 0.0) throw infeasible_spec("curve_overspeed never exceeds the lateral bound");
        gt.expected = detector_kind::curve_overspeed;
        gt.ego_id = target.id;
        gt.t_start = first;
        gt.t_end = last;
        gt.column = column_class::ego_trajectory;
        gt.stages = {row_stage::decision_making, row_stage::goal_risk_tolerance,
                     row_stage::knowledge};
        break;
      }

      case injection_kind::tailgate: {
        const auto lead_idx = static_cast<std::size_t>(detail::param(inj, "leader", 0.0));
        if (lead_idx >= out.data.trajectories.size())
          throw unknown_target(std::to_string(lead_idx));
        const trajectory& leader = out.data.trajectories[lead_idx];
        trajectory& target = out.data.trajectories[inj.target];
        const double dt = leader.states[1].t - leader.states[0].t;
        const polyline path = detail::recorded_path(leader);

        std::vector<double> s_lead(leader.states.size(), 0.0);
        for (std::size_t j = 1; j < leader.states.size(); ++j)
          s_lead[j] = s_lead[j - 1] +
                      (leader.states[j].position() - leader.states[j - 1].position()).norm();
        const auto s_lead_at = [&](double t) {
          t = std::clamp(t, leader.start_time(), leader.end_time());
          const std::size_t j = leader.index_before(t);
          const double u = (t - leader.states[j].t) / dt;
          return s_lead[j] + (s_lead[j + 1] - s_lead[j]) * u;
        };

        const double g0 = detail::param(inj, "gap0", 1.5);
        const double g1 = detail::param(inj, "gap1", 0.5);
        const double close_t = detail::param(inj, "close_t", 18.0);
        const double t_f0 = detail::snap_to_grid(leader.start_time() + g0, dt);
        const double onset = t_f0 + (inj.onset > 0.0 ? inj.onset : 5.0);
        const auto gap_time = [&](double t) {
          return g0 + (g1 - g0) * detail::smoothstep01((t - onset) / close_t);
        };

        trajectory follower;
        follower.id = target.id;
        follower.user_class = target.user_class;
        for (double t = t_f0; t <= leader.end_time() + 1e-9; t += dt) {
          const double s = s_lead_at(t - gap_time(t));
          state st;
          st.t = t;
          const vec2 p = path.at(s);
          st.x = p.x;
          st.y = p.y;
          st.heading = path.heading_at(s);
          follower.states.push_back(st);
        }
        target = follower;

        double first = -1.0, last = -1.0;
        for (std::size_t j = 1; j + 1 < follower.states.size(); ++j) {
          const double t = follower.states[j].t;
          const double gap_d = s_lead_at(t) - s_lead_at(t - gap_time(t));
          const double v_f =
              (follower.states[j + 1].position() - follower.states[j - 1].position()).norm() /
              (2.0 * dt);
          if (v_f > 1e-6 && gap_d / v_f < cfg.thw_crit) {
            if (first < 0.0) first = t;
            last = t;
          }
        }
        gt.expected = detector_kind::tailgating;
        gt.ego_id = follower.id;
        gt.t_start = first;
        gt.t_end = last;
        gt.column = column_class::ego_others;
        gt.stages = {row_stage::goal_risk_tolerance};
        break;
      }

      case injection_kind::near_collision_cross: {
        trajectory& target = out.data.trajectories[inj.target];
        const auto other_idx = static_cast<std::size_t>(detail::param(inj, "other", 0.0));
        if (other_idx >= out.data.trajectories.size())
          throw unknown_target(std::to_string(other_idx));
        const trajectory& other = out.data.trajectories[other_idx];
        const double dt = target.states[1].t - target.states[0].t;
        if (out.map.conflict_zones.empty()) throw no_conflict_zones();
        const auto& poly = out.map.conflict_zones.front().polygon;
        vec2 cp{};
        for (const auto& p : poly) cp = cp + p * (1.0 / static_cast<double>(poly.size()));

        const auto nearest_time = [&](const trajectory& tr) {
          double best = std::numeric_limits<double>::infinity(), t_best = tr.start_time();
          for (const auto& s : tr.states) {
            const double d = (s.position() - cp).norm();
            if (d < best) {
              best = d;
              t_best = s.t;
            }
          }
          return t_best;
        };
        const double offset = detail::param(inj, "arrival_offset", 0.3);
        const double shift =
            detail::snap_to_grid(nearest_time(other) + offset - nearest_time(target), dt);
        for (auto& s : target.states) s.t += shift;

        // closest approach on the shared grid pins the truth interval
        double best = std::numeric_limits<double>::infinity(), t_bar = 0.0;
        const double lo = std::max(target.start_time(), other.start_time());
        const double hi = std::min(target.end_time(), other.end_time());
        for (double t = lo; t <= hi + 1e-9; t += dt) {
          const double d = (target.position_at(t) - other.position_at(t)).norm();
          if (d < best) {
            best = d;
            t_bar = t;
          }
        }
        if (best > cfg.metrics.collision_radius)
          throw infeasible_spec("near_collision_cross approach is not critical");
        gt.expected = detector_kind::near_collision;
        gt.ego_id = target.id;
        gt.t_start = t_bar - cfg.ttc_crit;
        gt.t_end = t_bar;
        gt.column = column_class::ego_others;
        gt.stages = {row_stage::perception, row_stage::decision_making};
        break;
      }

      case injection_kind::wrong_way: {
        trajectory& target = out.data.trajectories[inj.target];
        const std::string lane_id = inj.aux.empty() ? "b" : inj.aux;
        const lane_segment* lane = out.map.find_lane(lane_id);
        if (!lane) throw unknown_lane(lane_id);
        const polyline path(detail::reversed(lane->centerline.points()));
        const double v = lane->speed_limit;
        target = detail::rebuild_speed(target, path, v, [](double, double) { return 0.0; });
        gt.expected = detector_kind::wrong_way;
        gt.ego_id = target.id;
        gt.t_start = target.start_time();
        gt.t_end = target.end_time();
        gt.column = column_class::ego_environment;
        gt.stages = {row_stage::perception};
        break;
      }

      case injection_kind::u_turn: {
        trajectory& target = out.data.trajectories[inj.target];
        const double dt = target.states[1].t - target.states[0].t;
        const lane_segment* in = out.map.find_lane("west_in");
        const lane_segment* back = out.map.find_lane("west_out");
        const virtual_loop* entry = out.map.find_loop("west-entry");
        const virtual_loop* exit = out.map.find_loop("west-exit");
        if (!in || !back || !entry || !exit)
          throw infeasible_spec("u_turn needs the intersection template");

        const double y_in = in->centerline.points().front().y;
        const double y_out = back->centerline.points().back().y;
        const double x0 = in->centerline.points().front().x;
        const double turn_x = detail::param(inj, "turn_x", -12.0);
        const double r = std::abs(y_out - y_in) / 2.0;
        const auto pts = detail::concat(
            {detail::line_points({x0, y_in}, {turn_x, y_in}, 5.0),
             sample_arc({turn_x, (y_in + y_out) / 2.0}, r, -std::numbers::pi / 2.0,
                        std::numbers::pi, 0.05),
             detail::line_points({turn_x, y_out}, {x0, y_out}, 5.0)});
        const polyline path(pts);
        const auto env = detail::make_envelope(path, in->speed_limit, {}, 0.25);

        const double gx = entry->gate_a.x;
        const double s_entry = gx - x0;
        const double s_exit = (turn_x - x0) + std::numbers::pi * r + (turn_x - gx);

        double t_in = -1.0, t_out = -1.0;
        double s = 0.0;
        trajectory turned;
        turned.id = target.id;
        turned.user_class = target.user_class;
        for (double t = target.start_time(); s < path.length() - 1e-9; t += dt) {
          state st;
          st.t = t;
          const vec2 p = path.at(s);
          st.x = p.x;
          st.y = p.y;
          st.heading = path.heading_at(s);
          turned.states.push_back(st);
          const double v = env.at(s);
          const double s_next = s + v * dt;
          const auto crossed = [&](double mark) {
            return s < mark && s_next >= mark ? t + dt * (mark - s) / std::max(s_next - s, 1e-12)
                                              : -1.0;
          };
          if (t_in < 0.0) t_in = std::max(t_in, crossed(s_entry));
          if (t_out < 0.0) t_out = std::max(t_out, crossed(s_exit));
          s = s_next;
        }
        target = std::move(turned);
        if (t_in < 0.0 || t_out < 0.0) throw infeasible_spec("u_turn path misses the loops");
        gt.expected = detector_kind::u_turn;
        gt.ego_id = target.id;
        gt.t_start = t_in;
        gt.t_end = t_out;
        gt.column = column_class::ego_environment;
        gt.stages = {row_stage::knowledge};
        break;
      }

      case injection_kind::cutting_corner: {
        trajectory& target = out.data.trajectories[inj.target];
        const double dt = target.states[1].t - target.states[0].t;
        const polyline path = detail::recorded_path(target);
        const double v0 = detail::initial_speed(target);
        const double amp = detail::param(inj, "lateral", 2.2);
        const double ramp = detail::param(inj, "ramp", 2.5);
        const double hold = detail::param(inj, "hold", 0.2);
        const double flip = detail::param(inj, "flip_offset", 1.75);

        double onset_rel = inj.onset;
        if (onset_rel <= 0.0) {
          double s = 0.0;
          while (s < path.length() && std::abs(path.curvature_at(s)) <= cfg.cutting_curvature)
            s += 0.5;
          onset_rel = s / v0 + 1.0;
        }
        const double onset = detail::snap_to_grid(target.start_time() + onset_rel, dt);
        const auto off = [&](double t) {
          const double tau = t - onset;
          if (tau <= 0.0) return 0.0;
          if (tau < ramp) return amp * 0.5 * (1.0 - std::cos(std::numbers::pi * tau / ramp));
          if (tau < ramp + hold) return amp;
          if (tau < 2.0 * ramp + hold)
            return amp * 0.5 *
                   (1.0 - std::cos(std::numbers::pi * (2.0 * ramp + hold - tau) / ramp));
          return 0.0;
        };

        trajectory cut;
        cut.id = target.id;
        cut.user_class = target.user_class;
        double first = -1.0, last = -1.0;
        for (double t = target.start_time(); t <= target.end_time() + 1e-9; t += dt) {
          const double s = v0 * (t - target.start_time());
          if (s >= path.length() - 1e-9) break;
          state st;
          st.t = t;
          const vec2 p = path.at(s) + path.tangent_at(s).perp() * off(t);
          st.x = p.x;
          st.y = p.y;
          st.heading = path.heading_at(s);
          cut.states.push_back(st);
          if (off(t) > flip) {
            if (first < 0.0) first = t;
            last = t;
          }
        }
        target = std::move(cut);
        if (first < 0.0) throw infeasible_spec("cutting_corner never reaches the oncoming lane");
        gt.expected = detector_kind::cutting_corner;
        gt.ego_id = target.id;
        gt.t_start = first;
        gt.t_end = last;
        gt.column = column_class::ego_environment;
        gt.stages = {row_stage::goal_risk_tolerance};
        break;
      }

      case injection_kind::priority_violation: {
        trajectory& violator = out.data.trajectories[inj.target];
        const auto holder_idx = static_cast<std::size_t>(detail::param(inj, "holder", 0.0));
        if (holder_idx >= out.data.trajectories.size())
          throw unknown_target(std::to_string(holder_idx));
        trajectory& holder = out.data.trajectories[holder_idx];
        if (out.map.conflict_zones.empty()) throw no_conflict_zones();
        const auto& zone = out.map.conflict_zones.front();
        const double dt = violator.states[1].t - violator.states[0].t;

        const auto occ_h = detail::zone_occupancy(holder, zone);
        const auto occ_v = detail::zone_occupancy(violator, zone);
        if (!occ_h || !occ_v) throw infeasible_spec("both users must cross the conflict zone");

        const double lead = detail::param(inj, "lead", 3.0);
        const double shift = detail::snap_to_grid(occ_h->first - lead - occ_v->first, dt);
        for (auto& s : violator.states) s.t += shift;
        const auto occ_new = detail::zone_occupancy(violator, zone);

        // the priority holder is forced to brake, creep, and recover
        const double onset = detail::snap_to_grid(occ_new->first + 0.3, dt);
        const double a_peak = detail::param(inj, "a_peak", 4.0);
        const double ramp = 0.5, v_low = 2.0, coast = 2.0;
        const polyline h_path = detail::recorded_path(holder);
        const double h_v0 = detail::initial_speed(holder);
        // phase machine shared across calls via mutable captures
        int phase = 0;  // 0 cruise, 1 ramp-in, 2 hold, 3 ramp-out, 4 coast, 5 accel
        double phase_t = 0.0, a_cur = 0.0;
        holder = detail::rebuild_speed(holder, h_path, h_v0, [&, dt](double t, double v) mutable {
          if (phase == 0 && t >= onset - 1e-9) {
            phase = 1;
            phase_t = t;
          }
          switch (phase) {
            case 1:
              a_cur = -a_peak * std::min((t - phase_t) / ramp, 1.0);
              if (t - phase_t >= ramp) phase = 2;
              break;
            case 2:
              a_cur = -a_peak;
              if (v <= v_low) {
                phase = 3;
                phase_t = t;
              }
              break;
            case 3:
              a_cur = -a_peak * (1.0 - std::min((t - phase_t) / ramp, 1.0));
              if (t - phase_t >= ramp) {
                phase = 4;
                phase_t = t;
              }
              break;
            case 4:
              a_cur = 0.0;
              if (t - phase_t >= coast) {
                phase = 5;
                phase_t = t;
              }
              break;
            case 5:
              a_cur = 1.2 * std::min((t - phase_t) / ramp, 1.0);
              if (v >= h_v0) {
                phase = 0;
                a_cur = 0.0;
              }
              break;
            default:
              a_cur = 0.0;
          }
          return v + a_cur * dt < 0.3 ? (0.3 - v) / dt : a_cur;
        });

        gt.expected = detector_kind::priority_violation;
        gt.ego_id = violator.id;
        gt.t_start = occ_new->first;
        gt.t_end = occ_new->second;
        gt.column = column_class::ego_others_environment;
        gt.stages = {row_stage::perception, row_stage::goal_risk_tolerance, row_stage::knowledge};
        break;
      }

      case injection_kind::recording_noise: {
        trajectory& target = out.data.trajectories[inj.target];
        const double onset =
            target.start_time() + (inj.onset > 0.0 ? inj.onset : 15.0);
        const double magnitude = detail::param(inj, "magnitude", 5.0);
        std::size_t best = 0;
        for (std::size_t i = 0; i < target.states.size(); ++i)
          if (std::abs(target.states[i].t - onset) < std::abs(target.states[best].t - onset))
            best = i;
        target.states[best].x += -magnitude * std::sin(target.states[best].heading);
        target.states[best].y += magnitude * std::cos(target.states[best].heading);
        gt.expected = detector_kind::noise_spike;
        gt.ego_id = target.id;
        gt.t_start = target.states[best].t;
        gt.t_end = target.states[best].t;
        gt.column = column_class::ego_trajectory;
        gt.stages = {row_stage::trajectory_recording};
        break;
      }

      case injection_kind::recording_dropout: {
        trajectory& target = out.data.trajectories[inj.target];
        const double t_a = target.start_time() + (inj.onset > 0.0 ? inj.onset : 15.0);
        const double gap = detail::param(inj, "gap", 1.0);
        std::vector<state> kept;
        for (const auto& s : target.states)
          if (!(s.t > t_a + 1e-9 && s.t < t_a + gap - 1e-9)) kept.push_back(s);
        if (kept.size() < 2 || kept.size() == target.states.size())
          throw infeasible_spec("dropout window removes nothing or everything");
        target.states = std::move(kept);
        gt.expected = detector_kind::dropout;
        gt.ego_id = target.id;
        gt.t_start = t_a;
        gt.t_end = t_a + gap;
        gt.column = column_class::ego_trajectory;
        gt.stages = {row_stage::trajectory_recording};
        break;
      }

      case injection_kind::missing_sign: {
        const std::string sign_id = inj.aux.empty() ? "sign_priority_west" : inj.aux;
        const auto it = std::find_if(out.map.signs.begin(), out.map.signs.end(),
                                     [&](const traffic_sign& s) { return s.id == sign_id; });
        if (it == out.map.signs.end()) throw dangling_reference(sign_id);
        out.map.signs.erase(it);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& tr : out.data.trajectories) {
          lo = std::min(lo, tr.start_time());
          hi = std::max(hi, tr.end_time());
        }
        gt.expected = detector_kind::missing_sign;
        gt.ego_id = "map";
        gt.t_start = lo;
        gt.t_end = hi;
        gt.column = column_class::ego_environment;
        gt.stages = {row_stage::static_environment_info};
        break;
      }
    }
    out.truth.push_back(std::move(gt));
  }
  return out;
}

struct standard_case {
  scenario_spec spec;
  std::vector<injection_spec> injections;
};

/// Canonical one-injection scenario per kind, used as the end-to-end oracle.
inline standard_case standard_scenario(injection_kind kind, std::uint64_t seed) {
  standard_case c;
  c.spec.seed = seed;
  switch (kind) {
    case injection_kind::harsh_brake:
      c.spec = {map_template::straight_2lane, 40.0, 10.0, 1, 45.0, 0.1, 8.0, seed};
      c.injections = {{kind, 0, 12.0, {}, ""}};
      break;
    case injection_kind::curve_overspeed:
      // limit 12 keeps the commanded 12 m/s under the speeding gate while
      // the 28 m radius pushes lateral accel well past the 4 m/s^2 bound
      c.spec = {map_template::curve, 28.0, 12.0, 1, 45.0, 0.1, 8.0, seed};
      c.injections = {{kind, 0, 0.0, {{"speed", 12.0}}, ""}};
      break;
    case injection_kind::tailgate:
      c.spec = {map_template::straight_2lane, 40.0, 10.0, 2, 60.0, 0.1, 8.0, seed};
      c.injections = {{kind, 1, 5.0, {{"leader", 0.0}}, ""}};
      break;
    case injection_kind::near_collision_cross:
      c.spec = {map_template::four_way_intersection, 40.0, 8.0, 2, 70.0, 0.1, 8.0, seed};
      c.injections = {{kind, 1, 0.0, {{"other", 0.0}}, ""}};
      break;
    case injection_kind::wrong_way:
      c.spec = {map_template::straight_2lane, 40.0, 10.0, 1, 45.0, 0.1, 8.0, seed};
      c.injections = {{kind, 0, 0.0, {}, "b"}};
      break;
    case injection_kind::u_turn:
      c.spec = {map_template::four_way_intersection, 40.0, 8.0, 1, 80.0, 0.1, 8.0, seed};
      c.injections = {{kind, 0, 0.0, {}, ""}};
      break;
    case injection_kind::cutting_corner:
      c.spec = {map_template::curve, 40.0, 8.0, 1, 60.0, 0.1, 8.0, seed};
      c.injections = {{kind, 0, 0.0, {}, ""}};
      break;
    case injection_kind::priority_violation:
      c.spec = {map_template::four_way_intersection, 40.0, 8.0, 2, 80.0, 0.1, 8.0, seed};
      c.injections = {{kind, 1, 0.0, {{"holder", 0.0}}, ""}};
      break;
    case injection_kind::recording_noise:
      c.spec = {map_template::straight_2lane, 40.0, 10.0, 1, 45.0, 0.1, 8.0, seed};
      c.injections = {{kind, 0, 15.0, {}, ""}};
      break;
    case injection_kind::recording_dropout:
      c.spec = {map_template::straight_2lane, 40.0, 10.0, 1, 45.0, 0.1, 8.0, seed};
      c.injections = {{kind, 0, 15.0, {}, ""}};
      break;
    case injection_kind::missing_sign:
      c.spec = {map_template::four_way_intersection, 40.0, 8.0, 3, 70.0, 0.1, 8.0, seed};
      c.injections = {{kind, 0, 0.0, {}, "sign_priority_west"}};
      break;
  }
  return c;
}

}  // namespace ccm

#endif  // CCMINER_SYNTHETIC_HPP_
