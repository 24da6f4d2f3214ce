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

#include <sstream>

#include "ccminer/io.hpp"
#include "ccminer/svg.hpp"
#include "ccminer/synthetic.hpp"

namespace {

ccm::dataset seeded_dataset(std::uint64_t seed, ccm::map_template tmpl) {
  ccm::scenario_spec spec;
  spec.tmpl = tmpl;
  spec.n_vehicles = 3;
  spec.duration = 50.0;
  spec.seed = seed;
  return ccm::generate_nominal(spec).data;
}

}  // namespace

TEST_CASE("minimal csv parses into validated tracks") {
  std::istringstream in(
      "# units: t s, x m, y m\n"
      "track_id,t,x,y\n"
      "a,0,0,0\n"
      "a,0.1,1,0\n"
      "b,0,5,5\n"
      "b,0.1,5,6\n");
  const auto data = ccm::parse_trajectories(in);
  REQUIRE(data.trajectories.size() == 2);
  REQUIRE(data.trajectories[0].id == "a");
  REQUIRE(data.trajectories[1].states[1].y == Catch::Approx(6.0));
}

TEST_CASE("a malformed field reports the offending line") {
  std::istringstream in(
      "track_id,t,x,y\n"
      "a,0,0,0\n"
      "a,abc,1,0\n");
  try {
    ccm::parse_trajectories(in);
    FAIL("expected parse_error");
  } catch (const ccm::parse_error& e) {
    REQUIRE(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("a missing required column is rejected up front") {
  std::istringstream in("track_id,t,x\na,0,0\n");
  REQUIRE_THROWS_AS(ccm::parse_trajectories(in), ccm::parse_error);
}

TEST_CASE("a file with no data rows is empty input") {
  std::istringstream in("track_id,t,x,y\n");
  REQUIRE_THROWS_AS(ccm::parse_trajectories(in), ccm::empty_input);
}

TEST_CASE("csv serialization round-trips generated datasets") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const auto data = seeded_dataset(seed, ccm::map_template::straight_2lane);
    std::istringstream in(ccm::serialize_trajectories(data));
    const auto back = ccm::parse_trajectories(in);
    REQUIRE(back.trajectories.size() == data.trajectories.size());
    for (std::size_t i = 0; i < data.trajectories.size(); ++i) {
      const auto& orig = data.trajectories[i];
      const auto& copy = back.trajectories[i];
      REQUIRE(copy.id == orig.id);
      REQUIRE(copy.user_class == orig.user_class);
      REQUIRE(copy.states.size() == orig.states.size());
      for (std::size_t k = 0; k < orig.states.size(); ++k) {
        REQUIRE(copy.states[k].t == orig.states[k].t);
        REQUIRE(copy.states[k].x == orig.states[k].x);
        REQUIRE(copy.states[k].y == orig.states[k].y);
        REQUIRE(copy.states[k].heading == orig.states[k].heading);
        REQUIRE(copy.states[k].speed.has_value() == orig.states[k].speed.has_value());
        if (orig.states[k].speed) REQUIRE(*copy.states[k].speed == *orig.states[k].speed);
      }
    }
  }
}

TEST_CASE("jsonl serialization round-trips") {
  const auto data = seeded_dataset(4, ccm::map_template::curve);
  std::istringstream in(ccm::serialize_trajectories(data, "jsonl"));
  const auto back = ccm::parse_trajectories(in, "jsonl");
  REQUIRE(ccm::serialize_trajectories(back, "jsonl") ==
          ccm::serialize_trajectories(data, "jsonl"));
}

TEST_CASE("map json round-trips through parse_map") {
  ccm::scenario_spec spec;
  spec.tmpl = ccm::map_template::four_way_intersection;
  const auto world = ccm::generate_nominal(spec);
  const auto j = ccm::map_to_json(world.map);
  std::istringstream in(j.dump());
  const auto back = ccm::parse_map(in);
  REQUIRE(ccm::map_to_json(back).dump() == j.dump());
  REQUIRE(back.lanes.size() == world.map.lanes.size());
  REQUIRE(back.conflict_zones.size() == world.map.conflict_zones.size());
}

TEST_CASE("map files with broken references are rejected") {
  std::istringstream dangling(R"({
    "lanes": [{"id": "a", "centerline": [[0,0],[10,0]], "oncoming_lane_id": "ghost"}]
  })");
  REQUIRE_THROWS_AS(ccm::parse_map(dangling), ccm::dangling_reference);

  std::istringstream degenerate(R"({
    "lanes": [{"id": "a", "centerline": [[0,0],[10,0]]}],
    "loops": [{"id": "l", "gate": [[1,1],[1,1]]}]
  })");
  REQUIRE_THROWS_AS(ccm::parse_map(degenerate), ccm::schema_error);
}

TEST_CASE("the config echo round-trips every threshold") {
  ccm::pipeline_config cfg;
  cfg.mode = ccm::label_mode::dataset;
  cfg.detectors.a_brake = 4.5;
  cfg.detectors.ttc_crit = 2.25;
  cfg.detectors.density_k = 7;
  cfg.reference.process_noise_x = cfg.reference.process_noise_y = 0.9;
  cfg.reference_meas.position_noise_std = 0.7;
  const auto j = ccm::config_to_json(cfg);
  const auto back = ccm::config_from_json(j);
  REQUIRE(ccm::config_to_json(back).dump() == j.dump());
  REQUIRE(back.mode == ccm::label_mode::dataset);
  REQUIRE(back.detectors.a_brake == 4.5);
  REQUIRE(back.detectors.density_k == 7);
}

TEST_CASE("reports are byte-identical across reruns") {
  const auto sc = ccm::standard_scenario(ccm::injection_kind::harsh_brake, 9);
  const auto world = ccm::generate_nominal(sc.spec);
  const auto result = ccm::inject(world.data, world.map, sc.injections);
  ccm::pipeline_config cfg;
  const auto r1 = ccm::run_pipeline(result.data, &result.map, cfg);
  const auto r2 = ccm::run_pipeline(result.data, &result.map, cfg);
  const auto j1 = ccm::report_to_json(r1, cfg).dump(2);
  const auto j2 = ccm::report_to_json(r2, cfg).dump(2);
  REQUIRE(j1 == j2);
  REQUIRE(!r1.detections.empty());
  REQUIRE(j1.find("\"format_version\": 1") != std::string::npos);
  REQUIRE(j1.find("timestamp") == std::string::npos);
}

TEST_CASE("detections survive the report round trip") {
  const auto sc = ccm::standard_scenario(ccm::injection_kind::tailgate, 2);
  const auto world = ccm::generate_nominal(sc.spec);
  const auto result = ccm::inject(world.data, world.map, sc.injections);
  ccm::pipeline_config cfg;
  const auto report = ccm::run_pipeline(result.data, &result.map, cfg);
  const auto j = ccm::report_to_json(report, cfg);
  const auto back = ccm::detections_from_json(j);
  REQUIRE(back.size() == report.detections.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    REQUIRE(back[i].kind == report.detections[i].kind);
    REQUIRE(back[i].ego_id == report.detections[i].ego_id);
    REQUIRE(back[i].t_start == report.detections[i].t_start);
    REQUIRE(back[i].candidate_stages == report.detections[i].candidate_stages);
    REQUIRE(back[i].required_data == report.detections[i].required_data);
    REQUIRE(back[i].uses_map_evidence == report.detections[i].uses_map_evidence);
  }
}

TEST_CASE("svg rendering is deterministic and marks detections") {
  const auto sc = ccm::standard_scenario(ccm::injection_kind::harsh_brake, 1);
  const auto world = ccm::generate_nominal(sc.spec);
  const auto result = ccm::inject(world.data, world.map, sc.injections);
  const auto report = ccm::run_pipeline(result.data, &result.map);

  const auto svg = ccm::render_svg(result.data, &result.map, report.detections);
  REQUIRE(svg == ccm::render_svg(result.data, &result.map, report.detections));
  REQUIRE(svg.find("<svg") != std::string::npos);
  REQUIRE(svg.find("</svg>") != std::string::npos);
  REQUIRE(svg.find("harsh_longitudinal") != std::string::npos);

  const auto bare = ccm::render_svg(result.data, nullptr, {});
  REQUIRE(bare.find("harsh_longitudinal") == std::string::npos);
}

TEST_CASE("scenario files select standard cases or full specs") {
  std::istringstream standard(R"({"standard": "u_turn", "seed": 3})");
  const auto sc = ccm::parse_scenario(standard);
  REQUIRE(sc.spec.tmpl == ccm::map_template::four_way_intersection);
  REQUIRE(sc.spec.seed == 3);
  REQUIRE(sc.injections.size() == 1);
  REQUIRE(sc.injections[0].kind == ccm::injection_kind::u_turn);

  std::istringstream full(R"({
    "template": "straight_2lane", "n_vehicles": 2, "duration": 45, "seed": 5,
    "injections": [{"kind": "harsh_brake", "target": 0, "onset": 10.0}]
  })");
  const auto fc = ccm::parse_scenario(full);
  REQUIRE(fc.spec.n_vehicles == 2);
  REQUIRE(fc.injections.size() == 1);
  REQUIRE(fc.injections[0].onset == 10.0);

  std::istringstream bad(R"({"standard": "nope"})");
  REQUIRE_THROWS_AS(ccm::parse_scenario(bad), ccm::schema_error);
}

TEST_CASE("ground truth serializes with its taxonomy cell") {
  const auto sc = ccm::standard_scenario(ccm::injection_kind::u_turn, 0);
  const auto world = ccm::generate_nominal(sc.spec);
  const auto result = ccm::inject(world.data, world.map, sc.injections);
  const auto j = ccm::ground_truth_to_json(result.truth);
  REQUIRE(j.size() == 1);
  REQUIRE(j[0]["expected"] == "u_turn");
  REQUIRE(j[0]["column"] == "ego_environment");
  REQUIRE(j[0]["stages"][0] == "knowledge");
}
