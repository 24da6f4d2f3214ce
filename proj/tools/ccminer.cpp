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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ccminer/io.hpp"
#include "ccminer/pipeline.hpp"
#include "ccminer/svg.hpp"
#include "ccminer/synthetic.hpp"

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ccm::io_error("cannot open '" + path + "'");
  return in;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ccm::io_error("cannot write '" + path + "'");
  out << content;
}

std::string guess_format(const std::string& path) {
  return path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl" ? "jsonl" : "csv";
}

ccm::pipeline_config load_config(const std::string& path) {
  if (path.empty()) return {};
  auto in = open_input(path);
  ccm::ordered_json j = ccm::ordered_json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ccm::schema_error("config file is not valid JSON");
  return ccm::config_from_json(j);
}

int run(int argc, char** argv) {
  CLI::App app{"corner-case miner for road-user trajectory datasets"};
  app.require_subcommand(1);

  std::string traj_path, map_path, ref_map_path, config_path, report_path, out_path, mode_str;

  auto* detect = app.add_subcommand("detect", "run the detector battery and write a report");
  detect->add_option("traj", traj_path, "trajectory file (csv or jsonl)")->required();
  detect->add_option("--map", map_path, "environment map (json)");
  detect->add_option("--reference-map", ref_map_path, "reference map for static diff checks");
  detect->add_option("--config", config_path, "threshold config (json)");
  detect->add_option("--out", out_path, "report output path (default stdout)");

  auto* metrics = app.add_subcommand("metrics", "pairwise criticality metrics");
  metrics->add_option("traj", traj_path, "trajectory file")->required();
  metrics->add_option("--map", map_path, "environment map (json)");
  metrics->add_option("--out", out_path, "output path (default stdout)");

  auto* classify = app.add_subcommand("classify", "re-label a report under a different mode");
  classify->add_option("report", report_path, "report json")->required();
  classify->add_option("--mode", mode_str, "analysis or dataset")->default_val("dataset");
  classify->add_option("--out", out_path, "output path (default stdout)");

  std::string scenario_path, out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  auto* generate = app.add_subcommand("generate", "synthesize a scenario with ground truth");
  generate->add_option("scenario", scenario_path, "scenario spec (json)")->required();
  generate->add_option("--seed", seed, "override the scenario seed")
      ->each([&](const std::string&) { seed_given = true; });
  generate->add_option("--out-dir", out_dir, "output directory")->required();

  auto* plot = app.add_subcommand("plot", "render the scene to svg");
  plot->add_option("traj", traj_path, "trajectory file")->required();
  plot->add_option("--map", map_path, "environment map (json)");
  plot->add_option("--report", report_path, "report json with detections to highlight");
  plot->add_option("--out", out_path, "svg output path")->required();

  CLI11_PARSE(app, argc, argv);

  const auto load_map = [&](const std::string& path) -> std::optional<ccm::environment_map> {
    if (path.empty()) return std::nullopt;
    auto in = open_input(path);
    return ccm::parse_map(in);
  };

  if (*detect) {
    auto in = open_input(traj_path);
    const auto data = ccm::parse_trajectories(in, guess_format(traj_path));
    const auto map = load_map(map_path);
    const auto ref = load_map(ref_map_path);
    const auto cfg = load_config(config_path);
    const auto report = ccm::run_pipeline(data, map ? &*map : nullptr, cfg,
                                          ref ? &*ref : nullptr);
    const std::string text = ccm::report_to_json(report, cfg).dump(2) + "\n";
    if (out_path.empty())
      std::cout << text;
    else
      write_file(out_path, text);
  } else if (*metrics) {
    auto in = open_input(traj_path);
    auto data = ccm::parse_trajectories(in, guess_format(traj_path));
    const auto map = load_map(map_path);
    ccm::pipeline_config cfg;
    for (auto& t : data.trajectories)
      t = ccm::derive_kinematics(ccm::resample_uniform(t, cfg.resample_dt));
    const auto pairs =
        ccm::min_over_pairs(data, map ? &*map : nullptr, cfg.detectors.metrics);
    ccm::ordered_json j = ccm::ordered_json::array();
    for (const auto& m : pairs) {
      ccm::ordered_json jm;
      jm["id_a"] = m.id_a;
      jm["id_b"] = m.id_b;
      jm["min_distance"] = m.min_distance;
      if (m.min_ttc) jm["min_ttc"] = *m.min_ttc;
      jm["dce"] = m.dce_overall;
      jm["ttce"] = m.ttce_overall;
      j.push_back(std::move(jm));
    }
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty())
      std::cout << text;
    else
      write_file(out_path, text);
  } else if (*classify) {
    auto in = open_input(report_path);
    ccm::ordered_json j = ccm::ordered_json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ccm::schema_error("report is not valid JSON");
    const auto mode =
        mode_str == "analysis" ? ccm::label_mode::analysis : ccm::label_mode::dataset;
    const auto detections = ccm::detections_from_json(j);
    ccm::ordered_json out = ccm::ordered_json::array();
    for (const auto& det : detections) {
      const auto lbl = ccm::label(det, mode);
      out.push_back(ccm::detection_to_json(det, lbl));
    }
    ccm::ordered_json doc;
    doc["format_version"] = ccm::kReportFormatVersion;
    doc["mode"] = mode == ccm::label_mode::dataset ? "dataset" : "analysis";
    doc["detections"] = std::move(out);
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty())
      std::cout << text;
    else
      write_file(out_path, text);
  } else if (*generate) {
    auto in = open_input(scenario_path);
    auto scenario = ccm::parse_scenario(in);
    if (seed_given) scenario.spec.seed = seed;
    const auto world = ccm::generate_nominal(scenario.spec);
    const auto result = ccm::inject(world.data, world.map, scenario.injections);
    std::filesystem::create_directories(out_dir);
    const auto base = std::filesystem::path(out_dir);
    write_file((base / "trajectories.csv").string(),
               ccm::serialize_trajectories(result.data, "csv"));
    write_file((base / "map.json").string(), ccm::map_to_json(result.map).dump(2) + "\n");
    write_file((base / "reference_map.json").string(),
               ccm::map_to_json(world.map).dump(2) + "\n");
    write_file((base / "ground_truth.json").string(),
               ccm::ground_truth_to_json(result.truth).dump(2) + "\n");
  } else if (*plot) {
    auto in = open_input(traj_path);
    const auto data = ccm::parse_trajectories(in, guess_format(traj_path));
    const auto map = load_map(map_path);
    std::vector<ccm::detection> detections;
    if (!report_path.empty()) {
      auto rin = open_input(report_path);
      ccm::ordered_json j = ccm::ordered_json::parse(rin, nullptr, false);
      if (j.is_discarded()) throw ccm::schema_error("report is not valid JSON");
      detections = ccm::detections_from_json(j);
    }
    write_file(out_path, ccm::render_svg(data, map ? &*map : nullptr, detections));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ccm::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
