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

#ifndef CCMINER_METRICS_HPP_
#define CCMINER_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ccminer/environment.hpp"
#include "ccminer/errors.hpp"
#include "ccminer/trajectory.hpp"

namespace ccm {

struct metrics_config {
  double collision_radius = 2.0;  // meters, sum of half-widths
  double pair_horizon = 50.0;     // meters, pruning distance for batch evaluation
};

/// Criticality measures for one common timestep of an ordered pair (a, b).
/// ttce/dce come from constant-velocity extrapolation of the relative motion:
/// ttce = max(0, -p.v/|v|^2), dce = |p + ttce*v|. ttc is ttce when the
/// extrapolated minimum comes within the collision radius.
struct encounter_step {
  double t = 0.0;
  double distance = 0.0;
  std::optional<double> ttc;  // seconds
  double dce = 0.0;           // meters
  double ttce = 0.0;          // seconds
  std::optional<double> thw;  // seconds, only with same-lane map context
};

struct encounter_metrics {
  std::string id_a;
  std::string id_b;
  std::vector<encounter_step> steps;
  double min_distance = 0.0;
  std::optional<double> min_ttc;
  double dce_overall = 0.0;
  double ttce_overall = 0.0;
};

/// Pairwise criticality profile over the common uniform time grid. Both
/// trajectories must carry derived kinematics at the same dt. If a map is
/// given, thw is filled where both users match the same lane with b ahead.
inline encounter_metrics encounter_profile(const trajectory& a, const trajectory& b,
                                           const environment_map* map = nullptr,
                                           const metrics_config& cfg = {}) {
  encounter_metrics out;
  out.id_a = a.id;
  out.id_b = b.id;

  const double dt = a.states[1].t - a.states[0].t;
  const double t_lo = std::max(a.start_time(), b.start_time());
  const double t_hi = std::min(a.end_time(), b.end_time());
  if (t_hi - t_lo < dt - 1e-9) throw no_overlap();

  std::vector<lane_match> match_a, match_b;
  if (map) {
    match_a = map_match(a, *map);
    match_b = map_match(b, *map);
  }

  out.min_distance = std::numeric_limits<double>::infinity();
  out.dce_overall = std::numeric_limits<double>::infinity();

  const std::size_t n_steps = static_cast<std::size_t>(std::floor((t_hi - t_lo) / dt + 1e-9)) + 1;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t = t_lo + static_cast<double>(k) * dt;

    encounter_step step;
    step.t = t;
    const vec2 p = b.position_at(t) - a.position_at(t);
    const vec2 va = a.velocity_at(t);
    const vec2 vb = b.velocity_at(t);
    const vec2 v = vb - va;
    step.distance = p.norm();
    const double v2 = v.norm2();
    step.ttce = v2 > 1e-12 ? std::max(0.0, -p.dot(v) / v2) : 0.0;
    step.dce = (p + v * step.ttce).norm();
    if (step.dce <= cfg.collision_radius && step.ttce > 0.0) step.ttc = step.ttce;

    if (map) {
      const std::size_t ia = a.index_before(t);
      const std::size_t ib = b.index_before(t);
      if (match_a[ia].lane_id && match_a[ia].lane_id == match_b[ib].lane_id) {
        const double gap = match_b[ib].arc_length - match_a[ia].arc_length;
        const double v_follow = va.norm();
        if (gap > 0.0 && v_follow > 1e-6) step.thw = gap / v_follow;
      }
    }

    out.min_distance = std::min(out.min_distance, step.distance);
    if (step.ttc && (!out.min_ttc || *step.ttc < *out.min_ttc)) out.min_ttc = step.ttc;
    if (step.dce < out.dce_overall) {
      out.dce_overall = step.dce;
      out.ttce_overall = step.ttce;
    }
    out.steps.push_back(step);
  }
  if (out.steps.size() < 2) throw no_overlap();
  return out;
}

/// Batch driver: encounter metrics for every ordered pair that overlaps in
/// time and comes within the horizon. Enumeration is lexicographic in the
/// trajectory ids; far pairs are pruned on bounding-box distance first.
inline std::vector<encounter_metrics> min_over_pairs(const dataset& data,
                                                     const environment_map* map = nullptr,
                                                     const metrics_config& cfg = {},
                                                     bool prune = true) {
  std::vector<const trajectory*> sorted;
  sorted.reserve(data.trajectories.size());
  for (const auto& t : data.trajectories) sorted.push_back(&t);
  std::sort(sorted.begin(), sorted.end(),
            [](const trajectory* l, const trajectory* r) { return l->id < r->id; });

  const auto bbox_gap = [](const trajectory& a, const trajectory& b) {
    double ax0 = 1e300, ax1 = -1e300, ay0 = 1e300, ay1 = -1e300;
    double bx0 = 1e300, bx1 = -1e300, by0 = 1e300, by1 = -1e300;
    for (const auto& s : a.states) {
      ax0 = std::min(ax0, s.x), ax1 = std::max(ax1, s.x);
      ay0 = std::min(ay0, s.y), ay1 = std::max(ay1, s.y);
    }
    for (const auto& s : b.states) {
      bx0 = std::min(bx0, s.x), bx1 = std::max(bx1, s.x);
      by0 = std::min(by0, s.y), by1 = std::max(by1, s.y);
    }
    const double dx = std::max({0.0, bx0 - ax1, ax0 - bx1});
    const double dy = std::max({0.0, by0 - ay1, ay0 - by1});
    return std::hypot(dx, dy);
  };

  std::vector<encounter_metrics> out;
  for (const trajectory* a : sorted) {
    for (const trajectory* b : sorted) {
      if (a == b) continue;
      if (std::min(a->end_time(), b->end_time()) - std::max(a->start_time(), b->start_time()) <=
          0.0)
        continue;
      if (prune && bbox_gap(*a, *b) >= cfg.pair_horizon) continue;
      encounter_metrics m;
      try {
        m = encounter_profile(*a, *b, map, cfg);
      } catch (const no_overlap&) {
        continue;
      }
      if (m.min_distance < cfg.pair_horizon) out.push_back(std::move(m));
    }
  }
  return out;
}

}  // namespace ccm

#endif  // CCMINER_METRICS_HPP_
