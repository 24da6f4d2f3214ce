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

#ifndef CCMINER_PIPELINE_HPP_
#define CCMINER_PIPELINE_HPP_

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ccminer/detectors.hpp"
#include "ccminer/environment.hpp"
#include "ccminer/errors.hpp"
#include "ccminer/metrics.hpp"
#include "ccminer/model.hpp"
#include "ccminer/taxonomy.hpp"
#include "ccminer/trajectory.hpp"

namespace ccm {

struct pipeline_config {
  double resample_dt = 0.1;          // seconds
  std::size_t smoothing_window = 1;  // odd; 1 disables smoothing
  detector_config detectors;
  label_mode mode = label_mode::analysis;
  // reference model behind the reported innovation score
  dynamics_model reference{dynamics_kind::constant_velocity, 0.5, 0.5, 0.1, 0.0};
  measurement_model reference_meas{0.3, 0.0};
};

struct trajectory_score {
  std::string id;
  double innovation_score = 0.0;  // top-5% mean normalized innovation squared
  double log_likelihood = 0.0;
  std::optional<double> density_score;  // needs enough peers
};

struct analysis_report {
  std::vector<detection> detections;
  std::vector<corner_case_label> labels;
  std::vector<situation> situations;
  std::vector<trajectory_score> scores;
  std::vector<encounter_metrics> pairs;
};

/// Thread budget: CC_MINER_THREADS caps the worker count (>=1).
inline std::size_t thread_budget() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CC_MINER_THREADS")) {
    const long v = std::atol(env);
    if (v >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(v));
  }
  return n;
}

namespace detail {

/// Deterministic parallel map: fn(i) for i in [0, n), output ordered by index.
template <typename Fn>
void parallel_for(std::size_t n, Fn fn) {
  const std::size_t workers = std::min(thread_budget(), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

inline bool intervals_touch(double a0, double a1, double b0, double b1, double pad) {
  return a0 - pad <= b1 && b0 - pad <= a1;
}

}  // namespace detail

/// Full detection pass. Recording artifacts are found on the raw traces;
/// everything else runs on the resampled, kinematics-derived dataset.
/// Kinematic findings that coincide with a recording artifact on the same
/// trajectory are suppressed: the data fault already explains them.
inline analysis_report run_pipeline(const dataset& raw, const environment_map* map,
                                    const pipeline_config& cfg = {},
                                    const environment_map* reference_map = nullptr) {
  const std::size_t n = raw.trajectories.size();
  if (n == 0) throw empty_input();

  std::vector<std::vector<detection>> artifact_by(n), kinematic_by(n), env_by(n);
  std::vector<trajectory_score> score_by(n);
  dataset processed;
  processed.metadata = raw.metadata;
  processed.trajectories.resize(n);

  detail::parallel_for(n, [&](std::size_t i) {
    const trajectory checked = validate(raw.trajectories[i]);
    artifact_by[i] = detect_recording_artifacts(checked, cfg.detectors);
    trajectory t = resample_uniform(checked, cfg.resample_dt);
    t = smooth_positions(std::move(t), cfg.smoothing_window);
    processed.trajectories[i] = derive_kinematics(std::move(t));
  });

  detail::parallel_for(n, [&](std::size_t i) {
    const trajectory& t = processed.trajectories[i];
    kinematic_by[i] = detect_kinematic(t, cfg.detectors);
    if (map && !map->lanes.empty()) env_by[i] = detect_env_rules(t, *map, cfg.detectors);

    trajectory_score sc;
    sc.id = t.id;
    dynamics_model dyn = cfg.reference;
    dyn.dt = cfg.resample_dt;
    try {
      sc.innovation_score = anomaly_score(dyn, cfg.reference_meas, t).aggregate;
      sc.log_likelihood = log_likelihood(dyn, cfg.reference_meas, t);
    } catch (const error&) {
      sc.innovation_score = 0.0;
      sc.log_likelihood = 0.0;
    }
    score_by[i] = std::move(sc);
  });

  for (std::size_t i = 0; i < n; ++i) {
    try {
      score_by[i].density_score =
          score_density_anomaly(processed.trajectories[i], processed, cfg.detectors);
    } catch (const dataset_too_small&) {
    }
  }

  analysis_report report;
  report.scores = std::move(score_by);
  report.pairs = min_over_pairs(processed, map, cfg.detectors.metrics);

  // artifact-aware suppression of kinematic findings
  const double pad = 3.0 * cfg.resample_dt;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& det : kinematic_by[i]) {
      bool masked = false;
      for (const auto& art : artifact_by[i])
        if (detail::intervals_touch(det.t_start, det.t_end, art.t_start, art.t_end, pad))
          masked = true;
      if (!masked) report.detections.push_back(std::move(det));
    }
    for (auto& det : artifact_by[i]) report.detections.push_back(std::move(det));
    for (auto& det : env_by[i]) report.detections.push_back(std::move(det));
  }

  for (auto& det : detect_interaction(processed, report.pairs, cfg.detectors))
    report.detections.push_back(std::move(det));
  if (map && !map->conflict_zones.empty())
    for (auto& det : detect_priority(processed, *map, report.pairs, cfg.detectors))
      report.detections.push_back(std::move(det));
  if (reference_map && map) {
    double lo = processed.trajectories.front().start_time(), hi = lo;
    for (const auto& t : processed.trajectories) {
      lo = std::min(lo, t.start_time());
      hi = std::max(hi, t.end_time());
    }
    for (auto& det : detect_map_diff(*reference_map, *map, lo, hi))
      report.detections.push_back(std::move(det));
  }

  std::stable_sort(report.detections.begin(), report.detections.end(),
                   [](const detection& a, const detection& b) {
                     if (a.ego_id != b.ego_id) return a.ego_id < b.ego_id;
                     if (a.t_start != b.t_start) return a.t_start < b.t_start;
                     return static_cast<int>(a.kind) < static_cast<int>(b.kind);
                   });

  report.labels.reserve(report.detections.size());
  for (const auto& det : report.detections) report.labels.push_back(label(det, cfg.mode));
  report.situations = situation_merge(report.labels);
  return report;
}

}  // namespace ccm

#endif  // CCMINER_PIPELINE_HPP_
