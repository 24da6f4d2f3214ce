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

#include <cmath>

#include "ccminer/io.hpp"
#include "ccminer/pipeline.hpp"
#include "ccminer/synthetic.hpp"

TEST_CASE("a free-flow vehicle converges to the speed limit") {
  ccm::scenario_spec spec;
  spec.tmpl = ccm::map_template::straight_2lane;
  spec.n_vehicles = 1;
  spec.duration = 45.0;
  spec.seed = 11;
  const auto world = ccm::generate_nominal(spec);
  REQUIRE(world.data.trajectories.size() == 1);
  const auto t = ccm::derive_kinematics(world.data.trajectories[0]);
  // after the launch transient and before the end-of-route slowdown the
  // cruise speed holds the limit
  for (double at = t.start_time() + 20.0; at <= t.start_time() + 30.0; at += 1.0)
    REQUIRE(t.velocity_at(at).norm() == Catch::Approx(spec.speed_limit).margin(0.2));
}

TEST_CASE("nominal traffic passes the full pipeline clean") {
  for (auto tmpl : {ccm::map_template::straight_2lane, ccm::map_template::curve,
                    ccm::map_template::four_way_intersection}) {
    ccm::scenario_spec spec;
    spec.tmpl = tmpl;
    spec.n_vehicles = 3;
    spec.duration = 70.0;
    spec.seed = 5;
    const auto world = ccm::generate_nominal(spec);
    const auto report = ccm::run_pipeline(world.data, &world.map);
    REQUIRE(report.detections.empty());
  }
}

TEST_CASE("car following settles at a comfortable headway") {
  ccm::scenario_spec spec;
  spec.tmpl = ccm::map_template::straight_2lane;
  spec.n_vehicles = 2;  // both on lane a, second one staggered behind
  spec.duration = 60.0;
  spec.seed = 2;
  const auto world = ccm::generate_nominal(spec);
  const auto lead = ccm::derive_kinematics(world.data.trajectories[0]);
  const auto follow = ccm::derive_kinematics(world.data.trajectories[1]);

  const double t0 = std::max(lead.start_time(), follow.start_time()) + 10.0;
  const double t1 = std::min(lead.end_time(), follow.end_time());
  REQUIRE(t1 > t0);
  std::size_t checked = 0;
  for (double t = t0; t <= t1; t += 1.0) {
    const auto pl = lead.position_at(t);
    const auto pf = follow.position_at(t);
    const double v = follow.velocity_at(t).norm();
    if (v < 1.0) continue;
    ++checked;
    const double thw = (pl - pf).norm() / v;
    REQUIRE(thw >= 1.5);
  }
  REQUIRE(checked > 10);
}

TEST_CASE("the same seed reproduces the dataset bit for bit") {
  ccm::scenario_spec spec;
  spec.tmpl = ccm::map_template::four_way_intersection;
  spec.n_vehicles = 4;
  spec.duration = 70.0;
  spec.seed = 77;
  const auto a = ccm::serialize_trajectories(ccm::generate_nominal(spec).data);
  const auto b = ccm::serialize_trajectories(ccm::generate_nominal(spec).data);
  REQUIRE(a == b);

  ccm::scenario_spec other = spec;
  other.seed = 78;
  REQUIRE(ccm::serialize_trajectories(ccm::generate_nominal(other).data) != a);
}

TEST_CASE("impossible scenario parameters are rejected") {
  ccm::scenario_spec spec;
  spec.duration = 0.1;
  REQUIRE_THROWS_AS(ccm::generate_nominal(spec), ccm::infeasible_spec);
  spec = {};
  spec.n_vehicles = 0;
  REQUIRE_THROWS_AS(ccm::generate_nominal(spec), ccm::infeasible_spec);
}

TEST_CASE("injections validate their targets") {
  ccm::scenario_spec spec;
  spec.duration = 45.0;
  const auto world = ccm::generate_nominal(spec);
  REQUIRE_THROWS_AS(
      ccm::inject(world.data, world.map, {{ccm::injection_kind::harsh_brake, 7, 0.0, {}, ""}}),
      ccm::unknown_target);
  REQUIRE_THROWS_AS(
      ccm::inject(world.data, world.map,
                  {{ccm::injection_kind::harsh_brake, 0, 12.0, {}, ""},
                   {ccm::injection_kind::recording_noise, 0, 20.0, {}, ""}}),
      ccm::conflicting_injections);
}

TEST_CASE("ground truth declares the taxonomy cell of each injection") {
  const auto check = [](ccm::injection_kind kind, ccm::column_class column,
                        const std::set<ccm::row_stage>& stages) {
    const auto sc = ccm::standard_scenario(kind, 3);
    const auto world = ccm::generate_nominal(sc.spec);
    const auto result = ccm::inject(world.data, world.map, sc.injections);
    REQUIRE(result.truth.size() == 1);
    REQUIRE(result.truth[0].source == kind);
    REQUIRE(result.truth[0].column == column);
    REQUIRE(result.truth[0].stages == stages);
    REQUIRE(result.truth[0].t_end > result.truth[0].t_start);
  };
  check(ccm::injection_kind::cutting_corner, ccm::column_class::ego_environment,
        {ccm::row_stage::goal_risk_tolerance});
  check(ccm::injection_kind::u_turn, ccm::column_class::ego_environment,
        {ccm::row_stage::knowledge});
  check(ccm::injection_kind::recording_dropout, ccm::column_class::ego_trajectory,
        {ccm::row_stage::trajectory_recording});
}

TEST_CASE("the injected u-turn crosses both west loops exactly once") {
  const auto sc = ccm::standard_scenario(ccm::injection_kind::u_turn, 1);
  const auto world = ccm::generate_nominal(sc.spec);
  const auto result = ccm::inject(world.data, world.map, sc.injections);
  const auto& ego = result.data.trajectories[0];
  for (const char* id : {"loop_west_entry", "loop_west_exit"}) {
    const auto* loop = result.map.find_loop(id);
    REQUIRE(loop != nullptr);
    REQUIRE(ccm::loop_crossings(ego, *loop).size() == 1);
  }
}

TEST_CASE("every standard scenario carries exactly one ground-truth item") {
  for (int k = 0; k <= static_cast<int>(ccm::injection_kind::missing_sign); ++k) {
    const auto kind = static_cast<ccm::injection_kind>(k);
    const auto sc = ccm::standard_scenario(kind, 0);
    const auto world = ccm::generate_nominal(sc.spec);
    const auto result = ccm::inject(world.data, world.map, sc.injections);
    REQUIRE(result.truth.size() == 1);
    REQUIRE(ccm::is_valid_cell(*result.truth[0].stages.begin(), result.truth[0].column));
  }
}

TEST_CASE("injection names round-trip through their string form") {
  for (int k = 0; k <= static_cast<int>(ccm::injection_kind::missing_sign); ++k) {
    const auto kind = static_cast<ccm::injection_kind>(k);
    const auto back = ccm::injection_kind_from(ccm::to_string(kind));
    REQUIRE(back.has_value());
    REQUIRE(*back == kind);
  }
  REQUIRE(!ccm::injection_kind_from("no_such_kind").has_value());
  REQUIRE(ccm::map_template_from("curve").has_value());
  REQUIRE(!ccm::map_template_from("dodecahedron").has_value());
}
