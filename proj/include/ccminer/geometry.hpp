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

#ifndef CCMINER_GEOMETRY_HPP_
#define CCMINER_GEOMETRY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

namespace ccm {

struct vec2 {
  double x = 0.0;
  double y = 0.0;

  vec2 operator+(vec2 o) const { return {x + o.x, y + o.y}; }
  vec2 operator-(vec2 o) const { return {x - o.x, y - o.y}; }
  vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const vec2&) const = default;

  double dot(vec2 o) const { return x * o.x + y * o.y; }
  double cross(vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double norm2() const { return x * x + y * y; }

  vec2 normalized() const {
    const double n = norm();
    return n > 0.0 ? vec2{x / n, y / n} : vec2{};
  }
  vec2 perp() const { return {-y, x}; }  // rotated +90 degrees
};

inline vec2 operator*(double s, vec2 v) { return v * s; }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w = std::numbers::pi;
  return w;
}

/// Interpolates between two headings along the shortest angular arc.
inline double lerp_angle(double a, double b, double s) {
  return wrap_angle(a + s * wrap_angle(b - a));
}

/// Twice the signed area of triangle (a, b, c). Positive when c lies left of a->b.
inline double orient(vec2 a, vec2 b, vec2 c) { return (b - a).cross(c - a); }

inline int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

/// Distance from point p to segment [a, b], plus the clamped projection parameter.
struct point_segment_result {
  double distance;
  double param;  // in [0, 1]
  vec2 closest;
};

inline point_segment_result point_segment_distance(vec2 p, vec2 a, vec2 b) {
  const vec2 ab = b - a;
  const double len2 = ab.norm2();
  double u = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  const vec2 c = a + ab * u;
  return {(p - c).norm(), u, c};
}

/// A polyline with cached cumulative arc length.
class polyline {
 public:
  polyline() = default;
  explicit polyline(std::vector<vec2> pts) : pts_(std::move(pts)) {
    arclen_.resize(pts_.size(), 0.0);
    for (std::size_t i = 1; i < pts_.size(); ++i) {
      arclen_[i] = arclen_[i - 1] + (pts_[i] - pts_[i - 1]).norm();
    }
  }

  const std::vector<vec2>& points() const { return pts_; }
  std::size_t size() const { return pts_.size(); }
  double length() const { return arclen_.empty() ? 0.0 : arclen_.back(); }

  /// Point at arc length s (clamped to [0, length]).
  vec2 at(double s) const {
    const auto [i, u] = locate(s);
    return pts_[i] + (pts_[i + 1] - pts_[i]) * u;
  }

  /// Unit tangent at arc length s.
  vec2 tangent_at(double s) const {
    const auto [i, u] = locate(s);
    (void)u;
    return (pts_[i + 1] - pts_[i]).normalized();
  }

  double heading_at(double s) const {
    const vec2 t = tangent_at(s);
    return std::atan2(t.y, t.x);
  }

  /// Discrete curvature at arc length s from the circumcircle of the
  /// surrounding vertex triple; 0 on end segments of a 2-point line.
  double curvature_at(double s) const {
    if (pts_.size() < 3) return 0.0;
    auto [i, u] = locate(s);
    (void)u;
    const std::size_t m = std::clamp<std::size_t>(i, 1, pts_.size() - 2);
    return vertex_curvature(m);
  }

  /// Closest point on the polyline: returns (distance, arc length, signed side).
  /// side > 0 means p lies left of the local travel direction.
  struct projection {
    double distance;
    double arc_length;
    double signed_offset;
  };

  projection project(vec2 p) const {
    projection best{std::numeric_limits<double>::infinity(), 0.0, 0.0};
    for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
      const auto r = point_segment_distance(p, pts_[i], pts_[i + 1]);
      if (r.distance < best.distance) {
        const double side = sign_of(orient(pts_[i], pts_[i + 1], p));
        best = {r.distance, arclen_[i] + r.param * (arclen_[i + 1] - arclen_[i]),
                side * r.distance};
      }
    }
    return best;
  }

 private:
  std::pair<std::size_t, double> locate(double s) const {
    if (pts_.size() < 2) return {0, 0.0};
    s = std::clamp(s, 0.0, length());
    std::size_t i = 0;
    while (i + 2 < pts_.size() && arclen_[i + 1] < s) ++i;
    const double seg = arclen_[i + 1] - arclen_[i];
    return {i, seg > 0.0 ? (s - arclen_[i]) / seg : 0.0};
  }

  double vertex_curvature(std::size_t m) const {
    const vec2 a = pts_[m - 1], b = pts_[m], c = pts_[m + 1];
    const double area2 = orient(a, b, c);
    const double la = (b - a).norm(), lb = (c - b).norm(), lc = (c - a).norm();
    const double denom = la * lb * lc;
    return denom > 1e-12 ? 2.0 * area2 / denom : 0.0;
  }

  std::vector<vec2> pts_;
  std::vector<double> arclen_;
};

/// Point-in-polygon by winding of crossings (even-odd rule).
inline bool point_in_polygon(vec2 p, const std::vector<vec2>& poly) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const bool straddles = (poly[i].y > p.y) != (poly[j].y > p.y);
    if (straddles) {
      const double x_at =
          poly[j].x + (poly[i].x - poly[j].x) * (p.y - poly[j].y) / (poly[i].y - poly[j].y);
      if (p.x < x_at) inside = !inside;
    }
  }
  return inside;
}

/// Samples a circular arc as a polyline. Positive sweep is counter-clockwise.
inline std::vector<vec2> sample_arc(vec2 center, double radius, double start_angle,
                                    double sweep, double max_step = 0.5) {
  const std::size_t n =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(std::abs(sweep) * radius / max_step)) + 1);
  std::vector<vec2> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = start_angle + sweep * static_cast<double>(i) / static_cast<double>(n - 1);
    pts.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
  }
  return pts;
}

}  // namespace ccm

#endif  // CCMINER_GEOMETRY_HPP_
