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

#ifndef CCMINER_TRAJECTORY_HPP_
#define CCMINER_TRAJECTORY_HPP_

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ccminer/errors.hpp"
#include "ccminer/geometry.hpp"

namespace ccm {

enum class road_user_class { car, truck, bus, motorcycle, bicycle, pedestrian };

inline const char* to_string(road_user_class c) {
  switch (c) {
    case road_user_class::car: return "car";
    case road_user_class::truck: return "truck";
    case road_user_class::bus: return "bus";
    case road_user_class::motorcycle: return "motorcycle";
    case road_user_class::bicycle: return "bicycle";
    default: return "pedestrian";
  }
}

inline std::optional<road_user_class> road_user_class_from(const std::string& s) {
  if (s == "car") return road_user_class::car;
  if (s == "truck") return road_user_class::truck;
  if (s == "bus") return road_user_class::bus;
  if (s == "motorcycle") return road_user_class::motorcycle;
  if (s == "bicycle") return road_user_class::bicycle;
  if (s == "pedestrian") return road_user_class::pedestrian;
  return std::nullopt;
}

/// One timestamped planar pose with optionally derived kinematics.
struct state {
  double t = 0.0;        // seconds
  double x = 0.0;        // meters
  double y = 0.0;        // meters
  double heading = 0.0;  // radians in (-pi, pi]
  std::optional<double> speed;      // m/s, >= 0
  std::optional<double> accel_lon;  // m/s^2, along velocity
  std::optional<double> accel_lat;  // m/s^2, perpendicular (left positive)
  std::optional<double> curvature;  // 1/m

  vec2 position() const { return {x, y}; }
  vec2 velocity() const {
    const double v = speed.value_or(0.0);
    return {v * std::cos(heading), v * std::sin(heading)};
  }
};

struct trajectory {
  std::string id;
  road_user_class user_class = road_user_class::car;
  std::vector<state> states;

  double start_time() const { return states.front().t; }
  double end_time() const { return states.back().t; }
  std::size_t size() const { return states.size(); }

  /// Index of the last state with states[i].t <= t (clamped).
  std::size_t index_before(double t) const {
    std::size_t i = 0;
    while (i + 2 < states.size() && states[i + 1].t <= t) ++i;
    return i;
  }

  /// Linearly interpolated position at time t (clamped to the span).
  vec2 position_at(double t) const {
    if (t <= states.front().t) return states.front().position();
    if (t >= states.back().t) return states.back().position();
    const std::size_t i = index_before(t);
    const double u = (t - states[i].t) / (states[i + 1].t - states[i].t);
    return states[i].position() + (states[i + 1].position() - states[i].position()) * u;
  }

  /// Linearly interpolated velocity vector at time t (needs derived speed).
  vec2 velocity_at(double t) const {
    if (t <= states.front().t) return states.front().velocity();
    if (t >= states.back().t) return states.back().velocity();
    const std::size_t i = index_before(t);
    const double u = (t - states[i].t) / (states[i + 1].t - states[i].t);
    return states[i].velocity() + (states[i + 1].velocity() - states[i].velocity()) * u;
  }
};

struct environment_map;  // defined in environment.hpp

struct dataset {
  std::vector<trajectory> trajectories;
  std::map<std::string, std::string> metadata;

  const trajectory* find(const std::string& id) const {
    for (const auto& t : trajectories)
      if (t.id == id) return &t;
    return nullptr;
  }
};

/// Checks the type invariants and normalizes headings. Returns the (possibly
/// adjusted) trajectory; throws on violation.
inline trajectory validate(trajectory traj) {
  if (traj.states.size() < 2) throw too_short(traj.states.size());
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    auto& s = traj.states[i];
    if (!std::isfinite(s.t)) throw non_finite_value(i, "t");
    if (!std::isfinite(s.x)) throw non_finite_value(i, "x");
    if (!std::isfinite(s.y)) throw non_finite_value(i, "y");
    if (!std::isfinite(s.heading)) throw non_finite_value(i, "heading");
    if (s.speed && (!std::isfinite(*s.speed) || *s.speed < 0.0)) throw non_finite_value(i, "speed");
    if (i > 0 && !(s.t > traj.states[i - 1].t)) throw non_monotone_time(i);
    s.heading = wrap_angle(s.heading);
  }
  return traj;
}

/// Resamples onto the uniform grid t0, t0+dt, ... <= tN. Positions are
/// linearly interpolated, heading via the shortest angular arc. Derived
/// fields are cleared for re-derivation.
inline trajectory resample_uniform(const trajectory& traj, double dt) {
  if (!(dt > 0.0)) throw invalid_step(dt);
  trajectory out;
  out.id = traj.id;
  out.user_class = traj.user_class;
  const double t0 = traj.states.front().t;
  const double t_end = traj.states.back().t;
  const std::size_t n = static_cast<std::size_t>(std::floor((t_end - t0) / dt + 1e-9)) + 1;
  out.states.reserve(n);
  std::size_t i = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    while (i + 2 < traj.states.size() && traj.states[i + 1].t <= t + 1e-12) ++i;
    const state& a = traj.states[i];
    const state& b = traj.states[i + 1];
    const double u = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
    state s;
    s.t = t;
    s.x = a.x + (b.x - a.x) * u;
    s.y = a.y + (b.y - a.y) * u;
    s.heading = lerp_angle(a.heading, b.heading, u);
    out.states.push_back(s);
  }
  return out;
}

namespace detail {
inline bool is_uniform(const std::vector<state>& s, double* dt_out) {
  const double dt = s[1].t - s[0].t;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (std::abs((s[i + 1].t - s[i].t) - dt) > 1e-6) return false;
  }
  *dt_out = dt;
  return true;
}
}  // namespace detail

/// Speed threshold below which heading is carried forward instead of being
/// read off the (noise-dominated) velocity vector.
inline constexpr double kHeadingSpeedEps = 0.1;  // m/s

/// Fills speed, heading, longitudinal/lateral acceleration, and curvature by
/// central finite differences (one-sided at the endpoints). Recorded speed
/// values take precedence over derived ones.
inline trajectory derive_kinematics(trajectory traj) {
  double dt = 0.0;
  if (!detail::is_uniform(traj.states, &dt)) throw non_uniform_sampling();
  const std::size_t n = traj.states.size();

  std::vector<vec2> vel(n), acc(n);
  auto p = [&](std::size_t i) { return traj.states[i].position(); };
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      vel[i] = (p(1) - p(0)) * (1.0 / dt);
    } else if (i + 1 == n) {
      vel[i] = (p(n - 1) - p(n - 2)) * (1.0 / dt);
    } else {
      vel[i] = (p(i + 1) - p(i - 1)) * (1.0 / (2.0 * dt));
    }
    const std::size_t m = std::clamp<std::size_t>(i, 1, n - 2);
    acc[i] = (p(m + 1) - p(m) * 2.0 + p(m - 1)) * (1.0 / (dt * dt));
  }

  double carried_heading = traj.states.front().heading;
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = traj.states[i];
    const double v = vel[i].norm();
    if (!s.speed) s.speed = v;
    if (v > kHeadingSpeedEps) {
      s.heading = std::atan2(vel[i].y, vel[i].x);
      carried_heading = s.heading;
    } else {
      s.heading = carried_heading;
    }
    const vec2 dir = v > kHeadingSpeedEps
                         ? vel[i].normalized()
                         : vec2{std::cos(carried_heading), std::sin(carried_heading)};
    s.accel_lon = acc[i].dot(dir);
    s.accel_lat = dir.cross(acc[i]);
    s.curvature = v > kHeadingSpeedEps ? vel[i].cross(acc[i]) / (v * v * v) : 0.0;
  }
  return traj;
}

/// Optional moving-average smoothing of positions (window must be odd; 1 = off).
inline trajectory smooth_positions(trajectory traj, std::size_t window) {
  if (window <= 1) return traj;
  const std::size_t half = window / 2;
  const std::size_t n = traj.states.size();
  std::vector<vec2> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    vec2 sum{};
    for (std::size_t j = lo; j <= hi; ++j) sum = sum + traj.states[j].position();
    out[i] = sum * (1.0 / static_cast<double>(hi - lo + 1));
  }
  for (std::size_t i = 0; i < n; ++i) {
    traj.states[i].x = out[i].x;
    traj.states[i].y = out[i].y;
  }
  return traj;
}

}  // namespace ccm

#endif  // CCMINER_TRAJECTORY_HPP_
