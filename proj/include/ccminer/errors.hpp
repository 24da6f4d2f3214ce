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

#ifndef CCMINER_ERRORS_HPP_
#define CCMINER_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccm {

/// Base class for all recoverable ccminer errors.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// trajectory validation
struct non_monotone_time : error {
  explicit non_monotone_time(std::size_t index)
      : error("non-monotone timestamp at state " + std::to_string(index)), index(index) {}
  std::size_t index;
};

struct non_finite_value : error {
  non_finite_value(std::size_t index, const std::string& field)
      : error("non-finite value in field '" + field + "' at state " + std::to_string(index)),
        index(index),
        field(field) {}
  std::size_t index;
  std::string field;
};

struct too_short : error {
  explicit too_short(std::size_t n)
      : error("trajectory has " + std::to_string(n) + " state(s), need at least 2"), n(n) {}
  std::size_t n;
};

struct invalid_step : error {
  explicit invalid_step(double dt) : error("resample step must be > 0, got " + std::to_string(dt)) {}
};

struct non_uniform_sampling : error {
  non_uniform_sampling() : error("kinematic derivation requires uniform sampling") {}
};

// generative model
struct bad_length : error {
  explicit bad_length(const std::string& what) : error(what) {}
};

struct singular_covariance : error {
  singular_covariance() : error("innovation covariance is singular; degenerate noise configuration") {}
};

// environment
struct empty_map : error {
  empty_map() : error("environment map has no lanes") {}
};

struct unknown_lane : error {
  explicit unknown_lane(const std::string& id) : error("unknown lane id '" + id + "'") {}
};

// metrics
struct no_overlap : error {
  no_overlap() : error("trajectories share fewer than two common timesteps") {}
};

// detectors
struct missing_kinematics : error {
  missing_kinematics() : error("kinematics not derived; call derive_kinematics first") {}
};

struct missing_map : error {
  missing_map() : error("environment map required for rule detectors") {}
};

struct no_conflict_zones : error {
  no_conflict_zones() : error("map defines no conflict zones") {}
};

struct dataset_too_small : error {
  explicit dataset_too_small(std::size_t n, std::size_t need)
      : error("density scoring needs at least " + std::to_string(need) + " trajectories, got " +
              std::to_string(n)) {}
};

// taxonomy
struct invalid_cell : error {
  invalid_cell(const std::string& stage, const std::string& column)
      : error("(" + stage + ", " + column + ") is not a valid taxonomy cell") {}
};

struct empty_stage_set : error {
  empty_stage_set() : error("label has no stages left after mode filtering") {}
};

struct inconsistent_declaration : error {
  explicit inconsistent_declaration(const std::string& what) : error(what) {}
};

// synthetic
struct infeasible_spec : error {
  explicit infeasible_spec(const std::string& what) : error(what) {}
};

struct conflicting_injections : error {
  explicit conflicting_injections(const std::string& what) : error(what) {}
};

struct unknown_target : error {
  explicit unknown_target(const std::string& what) : error(what) {}
};

// io
struct parse_error : error {
  parse_error(std::size_t line, const std::string& reason)
      : error("parse error at line " + std::to_string(line) + ": " + reason), line(line) {}
  std::size_t line;
};

struct empty_input : error {
  empty_input() : error("input contains no data rows") {}
};

struct schema_error : error {
  explicit schema_error(const std::string& what) : error(what) {}
};

struct dangling_reference : error {
  explicit dangling_reference(const std::string& id) : error("reference to unknown id '" + id + "'") {}
};

struct io_error : error {
  explicit io_error(const std::string& what) : error(what) {}
};

}  // namespace ccm

#endif  // CCMINER_ERRORS_HPP_
