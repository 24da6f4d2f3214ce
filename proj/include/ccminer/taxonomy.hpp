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

#ifndef CCMINER_TAXONOMY_HPP_
#define CCMINER_TAXONOMY_HPP_

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ccminer/detectors.hpp"
#include "ccminer/errors.hpp"

namespace ccm {

/// One cell of the 31-category matrix. Merged table cells are modeled as a
/// single cell spanning a column set, so the total count is structural.
struct taxonomy_cell {
  row_stage row;
  std::set<column_class> columns;

  bool operator<(const taxonomy_cell& o) const { return row < o.row; }
};

inline const std::vector<taxonomy_cell>& validity_matrix() {
  static const std::vector<taxonomy_cell> cells = [] {
    const std::set<column_class> all = {column_class::ego_trajectory, column_class::ego_others,
                                        column_class::ego_environment,
                                        column_class::ego_others_environment};
    std::vector<taxonomy_cell> v;
    const row_stage singleton_rows[] = {
        row_stage::perception,   row_stage::decision_making, row_stage::goal_risk_tolerance,
        row_stage::execution,    row_stage::body,            row_stage::knowledge,
        row_stage::environment};
    for (row_stage r : singleton_rows)
      for (column_class c : all) v.push_back({r, {c}});
    v.push_back({row_stage::comp_attentional_resources, all});
    v.push_back({row_stage::trajectory_recording, all});
    v.push_back({row_stage::static_environment_info,
                 {column_class::ego_environment, column_class::ego_others_environment}});
    return v;
  }();
  return cells;
}

inline bool is_valid_cell(row_stage stage, column_class column) {
  for (const auto& cell : validity_matrix())
    if (cell.row == stage && cell.columns.count(column)) return true;
  return false;
}

/// Recomputes the minimal data class from the detection's own evidence and
/// checks it against the detector declaration.
inline column_class required_data_class(const detection& det) {
  const bool others = !det.other_ids.empty();
  const bool env = det.uses_map_evidence;
  column_class cls;
  if (!others && !env)
    cls = column_class::ego_trajectory;
  else if (others && !env)
    cls = column_class::ego_others;
  else if (!others)
    cls = column_class::ego_environment;
  else
    cls = column_class::ego_others_environment;
  if (cls != det.required_data)
    throw inconsistent_declaration("detection '" + std::string(to_string(det.kind)) +
                                   "' declares " + to_string(det.required_data) +
                                   " but evidence implies " + to_string(cls));
  return cls;
}

enum class label_mode { analysis, dataset };

struct corner_case_label {
  detection det;
  column_class column;
  std::set<row_stage> stages;
  label_mode mode = label_mode::analysis;
};

namespace detail {
/// Kinds whose evidence is a rule violation persisting without correction;
/// for these, rule ignorance is observable and Knowledge survives dataset mode.
inline bool manifest_rule_ignorance(detector_kind kind) {
  return kind == detector_kind::u_turn || kind == detector_kind::wrong_way;
}
}  // namespace detail

/// Assigns the taxonomy label: column from the detection's evidence, stages
/// from the detector's candidate set filtered by mode. In dataset mode the
/// internal-resource stages are remapped to the manifestation stages already
/// present in the candidate set.
inline corner_case_label label(const detection& det, label_mode mode) {
  corner_case_label out;
  out.det = det;
  out.mode = mode;
  out.column = required_data_class(det);
  out.stages = det.candidate_stages;
  if (mode == label_mode::dataset) {
    out.stages.erase(row_stage::comp_attentional_resources);
    if (!detail::manifest_rule_ignorance(det.kind)) out.stages.erase(row_stage::knowledge);
  }
  if (out.stages.empty()) throw empty_stage_set();
  for (row_stage s : out.stages)
    if (!is_valid_cell(s, out.column)) throw invalid_cell(to_string(s), to_string(out.column));
  return out;
}

/// Labels on one ego whose intervals overlap, grouped into a situation.
struct situation {
  std::string ego_id;
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<corner_case_label> labels;
};

/// Groups co-occurring labels per ego; no label is dropped or rewritten.
inline std::vector<situation> situation_merge(const std::vector<corner_case_label>& labels) {
  std::vector<corner_case_label> sorted = labels;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const corner_case_label& a, const corner_case_label& b) {
                     if (a.det.ego_id != b.det.ego_id) return a.det.ego_id < b.det.ego_id;
                     return a.det.t_start < b.det.t_start;
                   });
  std::vector<situation> out;
  for (const auto& lbl : sorted) {
    if (!out.empty() && out.back().ego_id == lbl.det.ego_id &&
        lbl.det.t_start <= out.back().t_end) {
      out.back().labels.push_back(lbl);
      out.back().t_end = std::max(out.back().t_end, lbl.det.t_end);
    } else {
      out.push_back({lbl.det.ego_id, lbl.det.t_start, lbl.det.t_end, {lbl}});
    }
  }
  return out;
}

}  // namespace ccm

#endif  // CCMINER_TAXONOMY_HPP_
