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

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "ccminer/trajectory.hpp"

namespace {

ccm::trajectory make_track(const std::vector<std::array<double, 3>>& txy) {
  ccm::trajectory t;
  t.id = "t0";
  for (const auto& row : txy) {
    ccm::state s;
    s.t = row[0];
    s.x = row[1];
    s.y = row[2];
    t.states.push_back(s);
  }
  return t;
}

/// Independent heading-interpolation oracle: spherical interpolation of the
/// unit heading vectors, reading the angle back off the blended vector.
double slerp_heading(double a, double b, double u) {
  const ccm::vec2 va{std::cos(a), std::sin(a)};
  const ccm::vec2 vb{std::cos(b), std::sin(b)};
  double omega = std::acos(std::clamp(va.dot(vb), -1.0, 1.0));
  if (omega < 1e-12) return a;
  // antipodal headings: pick the arc passing counterclockwise from a
  if (std::abs(omega - std::numbers::pi) < 1e-12) {
    return ccm::wrap_angle(a + u * (b - a < 0 ? -omega : omega));
  }
  const double sa = std::sin((1.0 - u) * omega) / std::sin(omega);
  const double sb = std::sin(u * omega) / std::sin(omega);
  const ccm::vec2 v = va * sa + vb * sb;
  return std::atan2(v.y, v.x);
}

}  // namespace

TEST_CASE("validate accepts well-formed input") {
  auto t = make_track({{0, 0, 0}, {1, 1, 0}, {2, 2, 0}});
  REQUIRE_NOTHROW(ccm::validate(t));
}

TEST_CASE("validate rejects duplicate timestamps") {
  auto t = make_track({{0, 0, 0}, {1, 1, 0}, {1, 2, 0}});
  REQUIRE_THROWS_AS(ccm::validate(t), ccm::non_monotone_time);
}

TEST_CASE("validate rejects a single state") {
  auto t = make_track({{0, 0, 0}});
  REQUIRE_THROWS_AS(ccm::validate(t), ccm::too_short);
}

TEST_CASE("validate rejects non-finite values and normalizes heading") {
  auto bad = make_track({{0, 0, 0}, {1, 1, 0}});
  bad.states[1].x = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(ccm::validate(bad), ccm::non_finite_value);

  auto wrapped = make_track({{0, 0, 0}, {1, 1, 0}});
  wrapped.states[0].heading = 3.0 * std::numbers::pi;
  const auto out = ccm::validate(wrapped);
  REQUIRE(out.states[0].heading == Catch::Approx(std::numbers::pi));
}

TEST_CASE("resample interpolates positions linearly") {
  const auto t = ccm::validate(make_track({{0, 0, 0}, {1, 1, 0}, {2, 2, 0}}));
  const auto r = ccm::resample_uniform(t, 0.5);
  REQUIRE(r.states.size() == 5);
  REQUIRE(r.states[1].t == Catch::Approx(0.5));
  REQUIRE(r.states[1].x == Catch::Approx(0.5));
}

TEST_CASE("resample with dt equal to the span keeps the endpoints") {
  const auto t = ccm::validate(make_track({{0, 0, 0}, {1, 1, 0}, {2, 2, 0}}));
  const auto r = ccm::resample_uniform(t, 2.0);
  REQUIRE(r.states.size() == 2);
  REQUIRE(r.states[0].t == Catch::Approx(0.0));
  REQUIRE(r.states[1].t == Catch::Approx(2.0));
  REQUIRE(r.states[1].x == Catch::Approx(2.0));
}

TEST_CASE("resample interpolates heading along the shortest arc") {
  // headings -3.0 and +3.0 are 2*pi - 6 apart through the +/-pi seam
  auto t = make_track({{0, 0, 0}, {1, 0, 0}});
  t.states[0].heading = -3.0;
  t.states[1].heading = 3.0;
  const auto r = ccm::resample_uniform(ccm::validate(t), 0.5);
  const double h = r.states[1].heading;
  const double expected = slerp_heading(-3.0, 3.0, 0.5);
  // compare as unit vectors so the +/-pi representation cannot fail the test
  REQUIRE(std::cos(h) == Catch::Approx(std::cos(expected)).margin(1e-9));
  REQUIRE(std::sin(h) == Catch::Approx(std::sin(expected)).margin(1e-9));
  // the midpoint must sit on the far side of the seam, not at 0
  REQUIRE(std::abs(h) > 3.0);
}

TEST_CASE("heading interpolation matches the slerp oracle on random pairs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(-std::numbers::pi + 1e-3,
                                               std::numbers::pi - 1e-3);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = angle(rng), b = angle(rng), u = frac(rng);
    const double got = ccm::lerp_angle(a, b, u);
    const double want = slerp_heading(a, b, u);
    REQUIRE(std::cos(got) == Catch::Approx(std::cos(want)).margin(1e-9));
    REQUIRE(std::sin(got) == Catch::Approx(std::sin(want)).margin(1e-9));
  }
}

TEST_CASE("derive_kinematics on uniform motion") {
  std::vector<std::array<double, 3>> rows;
  for (int i = 0; i <= 20; ++i) rows.push_back({i * 0.1, i * 0.1, 0.0});
  const auto t = ccm::derive_kinematics(ccm::validate(make_track(rows)));
  for (const auto& s : t.states) {
    REQUIRE(*s.speed == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(*s.accel_lon == Catch::Approx(0.0).margin(1e-9));
    REQUIRE(*s.accel_lat == Catch::Approx(0.0).margin(1e-9));
  }
}

TEST_CASE("derive_kinematics recovers the closed-form circular motion") {
  // radius 20 m at 20 m/s: a_lat = v^2/r = 20 m/s^2, curvature = 0.05 1/m
  const double r = 20.0, v = 20.0, dt = 0.01;
  std::vector<std::array<double, 3>> rows;
  for (int i = 0; i <= 400; ++i) {
    const double phi = v / r * i * dt;
    rows.push_back({i * dt, r * std::cos(phi), r * std::sin(phi)});
  }
  const auto t = ccm::derive_kinematics(ccm::validate(make_track(rows)));
  for (std::size_t i = 5; i + 5 < t.states.size(); ++i) {
    REQUIRE(*t.states[i].speed == Catch::Approx(v).epsilon(0.01));
    REQUIRE(std::abs(*t.states[i].accel_lat) == Catch::Approx(v * v / r).epsilon(0.01));
    REQUIRE(std::abs(*t.states[i].curvature) == Catch::Approx(1.0 / r).epsilon(0.01));
  }
}

TEST_CASE("derive_kinematics carries heading through standstill") {
  auto t = make_track({{0, 5, 5}, {0.1, 5, 5}, {0.2, 5, 5}, {0.3, 5, 5}});
  t.states[0].heading = 1.25;
  const auto out = ccm::derive_kinematics(ccm::validate(t));
  for (const auto& s : out.states) {
    REQUIRE(*s.speed == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(s.heading == Catch::Approx(1.25));
  }
}

TEST_CASE("recorded speed takes precedence over the derived value") {
  auto t = make_track({{0, 0, 0}, {0.1, 1, 0}, {0.2, 2, 0}});
  for (auto& s : t.states) s.speed = 42.0;
  const auto out = ccm::derive_kinematics(ccm::validate(t));
  for (const auto& s : out.states) REQUIRE(*s.speed == Catch::Approx(42.0));
}

TEST_CASE("derive_kinematics requires a uniform grid") {
  const auto t = ccm::validate(make_track({{0, 0, 0}, {0.1, 1, 0}, {0.35, 2, 0}}));
  REQUIRE_THROWS_AS(ccm::derive_kinematics(t), ccm::non_uniform_sampling);
}

TEST_CASE("resample rejects a non-positive step") {
  const auto t = ccm::validate(make_track({{0, 0, 0}, {1, 1, 0}}));
  REQUIRE_THROWS_AS(ccm::resample_uniform(t, 0.0), ccm::invalid_step);
}

TEST_CASE("smoothing preserves straight lines") {
  std::vector<std::array<double, 3>> rows;
  for (int i = 0; i <= 20; ++i) rows.push_back({i * 0.1, i * 0.5, i * 0.25});
  const auto t = ccm::validate(make_track(rows));
  const auto sm = ccm::smooth_positions(t, 5);
  for (std::size_t i = 2; i + 2 < sm.states.size(); ++i) {
    REQUIRE(sm.states[i].x == Catch::Approx(t.states[i].x).margin(1e-9));
    REQUIRE(sm.states[i].y == Catch::Approx(t.states[i].y).margin(1e-9));
  }
}
