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

#ifndef CCMINER_SVG_HPP_
#define CCMINER_SVG_HPP_

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "ccminer/detectors.hpp"
#include "ccminer/environment.hpp"
#include "ccminer/trajectory.hpp"

namespace ccm {

namespace detail {

/// Fixed-precision coordinate formatting keeps the output byte-stable.
inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v + 0.0);  // normalize -0
  return buf;
}

inline std::string svg_path(const std::vector<vec2>& pts) {
  std::string d;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    d += i == 0 ? "M" : " L";
    d += svg_num(pts[i].x) + "," + svg_num(-pts[i].y);  // y up in world, down in svg
  }
  return d;
}

}  // namespace detail

/// Deterministic scene rendering: lanes as ribbons, loops as dashed gates,
/// trajectories as polylines, detections as highlighted sub-paths with the
/// detector name. Identical inputs produce identical bytes.
inline std::string render_svg(const dataset& data, const environment_map* map,
                              const std::vector<detection>& detections) {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  bool seeded = false;
  const auto grow = [&](vec2 p) {
    if (!seeded) {
      x0 = x1 = p.x;
      y0 = y1 = p.y;
      seeded = true;
      return;
    }
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  };
  if (map)
    for (const auto& lane : map->lanes)
      for (const auto& p : lane.centerline.points()) grow(p);
  for (const auto& t : data.trajectories)
    for (const auto& s : t.states) grow(s.position());
  const double margin = 10.0;
  x0 -= margin, y0 -= margin, x1 += margin, y1 += margin;

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << detail::svg_num(x0) << " "
      << detail::svg_num(-y1) << " " << detail::svg_num(x1 - x0) << " " << detail::svg_num(y1 - y0)
      << "\">\n";
  out << "<rect x=\"" << detail::svg_num(x0) << "\" y=\"" << detail::svg_num(-y1) << "\" width=\""
      << detail::svg_num(x1 - x0) << "\" height=\"" << detail::svg_num(y1 - y0)
      << "\" fill=\"#fafafa\"/>\n";

  if (map) {
    for (const auto& lane : map->lanes) {
      out << "<path d=\"" << detail::svg_path(lane.centerline.points())
          << "\" fill=\"none\" stroke=\"#d0d0d0\" stroke-width=\"" << detail::svg_num(lane.width)
          << "\" stroke-linecap=\"butt\"/>\n";
      out << "<path d=\"" << detail::svg_path(lane.centerline.points())
          << "\" fill=\"none\" stroke=\"#9a9a9a\" stroke-width=\"0.15\" "
             "stroke-dasharray=\"2,2\"/>\n";
    }
    for (const auto& zone : map->conflict_zones) {
      out << "<path d=\"" << detail::svg_path(zone.polygon)
          << " Z\" fill=\"#ffe9c9\" fill-opacity=\"0.6\" stroke=\"#e0a23c\" "
             "stroke-width=\"0.2\"/>\n";
    }
    for (const auto& loop : map->loops) {
      out << "<path d=\"" << detail::svg_path({loop.gate_a, loop.gate_b})
          << "\" fill=\"none\" stroke=\"#3060c0\" stroke-width=\"0.3\" "
             "stroke-dasharray=\"1,1\"/>\n";
      out << "<text x=\"" << detail::svg_num(loop.gate_a.x) << "\" y=\""
          << detail::svg_num(-loop.gate_a.y - 0.5)
          << "\" font-size=\"2\" fill=\"#3060c0\">" << loop.label << "</text>\n";
    }
    for (const auto& sign : map->signs) {
      out << "<circle cx=\"" << detail::svg_num(sign.position.x) << "\" cy=\""
          << detail::svg_num(-sign.position.y)
          << "\" r=\"0.8\" fill=\"#c03030\" fill-opacity=\"0.8\"/>\n";
    }
  }

  for (const auto& traj : data.trajectories) {
    std::vector<vec2> pts;
    pts.reserve(traj.states.size());
    for (const auto& s : traj.states) pts.push_back(s.position());
    out << "<path d=\"" << detail::svg_path(pts)
        << "\" fill=\"none\" stroke=\"#207040\" stroke-width=\"0.4\"/>\n";
    out << "<text x=\"" << detail::svg_num(pts.front().x) << "\" y=\""
        << detail::svg_num(-pts.front().y - 0.8) << "\" font-size=\"2\" fill=\"#207040\">"
        << traj.id << "</text>\n";

    // highlighted sub-paths for every detection on this trajectory
    for (const auto& det : detections) {
      if (det.ego_id != traj.id) continue;
      std::vector<vec2> seg;
      for (const auto& s : traj.states)
        if (s.t >= det.t_start - 1e-9 && s.t <= det.t_end + 1e-9) seg.push_back(s.position());
      if (seg.size() < 2) {
        const vec2 p = traj.position_at((det.t_start + det.t_end) / 2.0);
        out << "<circle cx=\"" << detail::svg_num(p.x) << "\" cy=\"" << detail::svg_num(-p.y)
            << "\" r=\"1.2\" fill=\"none\" stroke=\"#d02020\" stroke-width=\"0.4\"/>\n";
        out << "<text x=\"" << detail::svg_num(p.x + 1.5) << "\" y=\"" << detail::svg_num(-p.y)
            << "\" font-size=\"2\" fill=\"#d02020\">" << to_string(det.kind) << "</text>\n";
        continue;
      }
      out << "<path d=\"" << detail::svg_path(seg)
          << "\" fill=\"none\" stroke=\"#d02020\" stroke-width=\"0.9\" "
             "stroke-opacity=\"0.85\"/>\n";
      out << "<text x=\"" << detail::svg_num(seg.front().x) << "\" y=\""
          << detail::svg_num(-seg.front().y + 2.5) << "\" font-size=\"2\" fill=\"#d02020\">"
          << to_string(det.kind) << "</text>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace ccm

#endif  // CCMINER_SVG_HPP_
