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

#ifndef CCMINER_MODEL_HPP_
#define CCMINER_MODEL_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "ccminer/errors.hpp"
#include "ccminer/trajectory.hpp"

namespace ccm {

enum class dynamics_kind { constant_velocity, constant_acceleration, coordinated_turn };

/// Markov linear-Gaussian approximation of the trajectory dynamics.
/// process_noise is the white acceleration (CV/CT) or jerk (CA) standard
/// deviation per axis. A value of zero yields deterministic dynamics.
struct dynamics_model {
  dynamics_kind kind = dynamics_kind::constant_velocity;
  double process_noise_x = 0.5;
  double process_noise_y = 0.5;
  double dt = 0.1;
  double nominal_yaw_rate = 0.0;  // rad/s, used by coordinated_turn
};

struct measurement_model {
  double position_noise_std = 0.3;  // meters; zero yields exact observation
  double dropout_prob = 0.0;        // [0, 1)
};

struct control_input {
  double accel_command = 0.0;     // m/s^2, along current velocity
  double yaw_rate_command = 0.0;  // rad/s
};

struct dynamics_context {
  double friction_scale = 1.0;  // (0, 1], multiplies commanded acceleration
  double speed_cap = 100.0;     // m/s
};

struct measurement_context {
  // Dropout probability is forced to 1 inside these [t_start, t_end] windows.
  std::vector<std::pair<double, double>> occlusion_intervals;

  bool occluded(double t) const {
    for (const auto& [a, b] : occlusion_intervals)
      if (t >= a - 1e-9 && t <= b + 1e-9) return true;
    return false;
  }
};

namespace detail {

inline int state_dim(dynamics_kind k) {
  return k == dynamics_kind::constant_acceleration ? 6 : 4;
}

/// State layout: [x, y, vx, vy] (CV/CT) or [x, y, vx, vy, ax, ay] (CA).
inline Eigen::MatrixXd transition(const dynamics_model& dyn, double dt) {
  const int n = state_dim(dyn.kind);
  Eigen::MatrixXd f = Eigen::MatrixXd::Identity(n, n);
  switch (dyn.kind) {
    case dynamics_kind::constant_velocity:
      f(0, 2) = dt;
      f(1, 3) = dt;
      break;
    case dynamics_kind::constant_acceleration:
      f(0, 2) = dt;
      f(1, 3) = dt;
      f(0, 4) = 0.5 * dt * dt;
      f(1, 5) = 0.5 * dt * dt;
      f(2, 4) = dt;
      f(3, 5) = dt;
      break;
    case dynamics_kind::coordinated_turn: {
      const double w = dyn.nominal_yaw_rate;
      if (std::abs(w) < 1e-12) {
        f(0, 2) = dt;
        f(1, 3) = dt;
      } else {
        const double s = std::sin(w * dt), c = std::cos(w * dt);
        f(0, 2) = s / w;
        f(0, 3) = -(1.0 - c) / w;
        f(1, 2) = (1.0 - c) / w;
        f(1, 3) = s / w;
        f(2, 2) = c;
        f(2, 3) = -s;
        f(3, 2) = s;
        f(3, 3) = c;
      }
      break;
    }
  }
  return f;
}

inline Eigen::MatrixXd process_cov(const dynamics_model& dyn, double dt) {
  const int n = state_dim(dyn.kind);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  const double sx2 = dyn.process_noise_x * dyn.process_noise_x;
  const double sy2 = dyn.process_noise_y * dyn.process_noise_y;
  if (dyn.kind == dynamics_kind::constant_acceleration) {
    // white jerk: per-axis blocks over [pos, vel, acc]
    const double d2 = dt * dt, d3 = d2 * dt, d4 = d3 * dt, d5 = d4 * dt;
    const double g[3][3] = {{d5 / 20, d4 / 8, d3 / 6}, {d4 / 8, d3 / 3, d2 / 2}, {d3 / 6, d2 / 2, dt}};
    const int idx[3] = {0, 2, 4};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        q(idx[a], idx[b]) = g[a][b] * sx2;
        q(idx[a] + 1, idx[b] + 1) = g[a][b] * sy2;
      }
  } else {
    // white acceleration held over the step: w = [dt^2/2, dt]^T * n_axis
    const double d2 = dt * dt;
    const double g[2][2] = {{d2 * d2 / 4, d2 * dt / 2}, {d2 * dt / 2, d2}};
    const int idx[2] = {0, 2};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        q(idx[a], idx[b]) = g[a][b] * sx2;
        q(idx[a] + 1, idx[b] + 1) = g[a][b] * sy2;
      }
  }
  return q;
}

inline Eigen::MatrixXd measurement_matrix(int n) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, n);
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  return h;
}

inline state to_state(const Eigen::VectorXd& x, double t) {
  state s;
  s.t = t;
  s.x = x(0);
  s.y = x(1);
  const double v = std::hypot(x(2), x(3));
  s.speed = v;
  s.heading = v > kHeadingSpeedEps ? std::atan2(x(3), x(2)) : 0.0;
  return s;
}

}  // namespace detail

/// Draws one latent/observed trajectory pair from the model. Deterministic
/// for a fixed seed. Observed states are deleted where dropout fires or an
/// occlusion interval covers the timestamp.
inline std::pair<trajectory, trajectory> simulate(const dynamics_model& dyn,
                                                  const measurement_model& meas,
                                                  const dynamics_context& ctx_d,
                                                  const measurement_context& ctx_m,
                                                  const state& init,
                                                  const std::vector<control_input>& controls,
                                                  std::size_t n, std::uint64_t seed) {
  if (n < 2) throw bad_length("simulation needs N >= 2 steps");
  if (!controls.empty() && controls.size() != n - 1)
    throw bad_length("controls must have length N-1 or be empty");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const int dim = detail::state_dim(dyn.kind);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  x(0) = init.x;
  x(1) = init.y;
  const double v0 = init.speed.value_or(0.0);
  x(2) = v0 * std::cos(init.heading);
  x(3) = v0 * std::sin(init.heading);

  trajectory latent, observed;
  latent.id = "latent";
  observed.id = "observed";

  const auto clamp_speed = [&](Eigen::VectorXd& s) {
    const double v = std::hypot(s(2), s(3));
    if (v > ctx_d.speed_cap && v > 0.0) {
      s(2) *= ctx_d.speed_cap / v;
      s(3) *= ctx_d.speed_cap / v;
    }
  };

  for (std::size_t k = 0; k < n; ++k) {
    const double t = init.t + static_cast<double>(k) * dyn.dt;
    latent.states.push_back(detail::to_state(x, t));

    // measurement
    const double mx = x(0) + meas.position_noise_std * gauss(rng);
    const double my = x(1) + meas.position_noise_std * gauss(rng);
    const bool dropped = ctx_m.occluded(t) || unif(rng) < meas.dropout_prob;
    if (!dropped) {
      state z = latent.states.back();
      z.x = mx;
      z.y = my;
      z.speed.reset();
      observed.states.push_back(z);
    }

    if (k + 1 == n) break;

    // transition
    dynamics_model step = dyn;
    control_input u = controls.empty() ? control_input{} : controls[k];
    if (dyn.kind == dynamics_kind::coordinated_turn && !controls.empty())
      step.nominal_yaw_rate = u.yaw_rate_command;
    x = detail::transition(step, dyn.dt) * x;

    if (u.accel_command != 0.0) {
      const double a = u.accel_command * ctx_d.friction_scale;
      const double v = std::hypot(x(2), x(3));
      const vec2 dir = v > 1e-9 ? vec2{x(2) / v, x(3) / v}
                                : vec2{std::cos(init.heading), std::sin(init.heading)};
      x(2) += a * dyn.dt * dir.x;
      x(3) += a * dyn.dt * dir.y;
    }

    const double nx = dyn.process_noise_x * gauss(rng);
    const double ny = dyn.process_noise_y * gauss(rng);
    if (dyn.kind == dynamics_kind::constant_acceleration) {
      x(4) += nx * dyn.dt;
      x(5) += ny * dyn.dt;
    } else {
      x(0) += 0.5 * nx * dyn.dt * dyn.dt;
      x(1) += 0.5 * ny * dyn.dt * dyn.dt;
      x(2) += nx * dyn.dt;
      x(3) += ny * dyn.dt;
    }
    clamp_speed(x);
  }
  return {std::move(latent), std::move(observed)};
}

struct innovation {
  std::size_t step;          // grid index of the update
  Eigen::Vector2d residual;  // measurement minus prediction
  Eigen::Matrix2d covariance;
};

struct filter_result {
  trajectory estimates;  // one state per grid step from the second observation on
  std::vector<innovation> innovations;
};

/// Linear-Gaussian predict/update recursion on the uniform grid implied by
/// dyn.dt. Missing grid steps are handled by pure prediction. The filter is
/// initialized by two-point differencing from the first two observations.
inline filter_result filter(const dynamics_model& dyn, const measurement_model& meas,
                            const trajectory& observed) {
  if (observed.states.size() < 2) throw too_short(observed.states.size());
  const int dim = detail::state_dim(dyn.kind);
  const double dt = dyn.dt;
  const double t0 = observed.states.front().t;

  // map observations onto the grid
  std::vector<std::optional<Eigen::Vector2d>> z;
  for (const auto& s : observed.states) {
    const double kf = (s.t - t0) / dt;
    const auto k = static_cast<std::size_t>(std::llround(kf));
    if (std::abs(kf - static_cast<double>(k)) > 1e-6) throw non_uniform_sampling();
    if (z.size() <= k) z.resize(k + 1);
    z[k] = Eigen::Vector2d(s.x, s.y);
  }

  // two-point initialization from the first two available observations
  std::size_t ka = 0;
  while (!z[ka]) ++ka;
  std::size_t kb = ka + 1;
  while (kb < z.size() && !z[kb]) ++kb;
  const double span = static_cast<double>(kb - ka) * dt;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  x.head<2>() = *z[kb];
  x.segment<2>(2) = (*z[kb] - *z[ka]) / span;

  const double r = std::max(meas.position_noise_std * meas.position_noise_std, 1e-12);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(dim, dim);
  for (int axis = 0; axis < 2; ++axis) {
    p(axis, axis) = r;
    p(axis, 2 + axis) = r / span;
    p(2 + axis, axis) = r / span;
    p(2 + axis, 2 + axis) = 2.0 * r / span / span;
  }
  if (dim == 6) {
    p(4, 4) = 25.0;
    p(5, 5) = 25.0;
  }

  const Eigen::MatrixXd f = detail::transition(dyn, dt);
  const Eigen::MatrixXd q = detail::process_cov(dyn, dt);
  const Eigen::MatrixXd h = detail::measurement_matrix(dim);
  const Eigen::Matrix2d rmat = Eigen::Matrix2d::Identity() * r;

  filter_result out;
  out.estimates.id = observed.id;
  out.estimates.user_class = observed.user_class;
  out.estimates.states.push_back(detail::to_state(x, t0 + static_cast<double>(kb) * dt));

  for (std::size_t k = kb + 1; k < z.size(); ++k) {
    x = f * x;
    p = f * p * f.transpose() + q;
    if (z[k]) {
      const Eigen::Vector2d resid = *z[k] - h * x;
      const Eigen::Matrix2d s = (h * p * h.transpose() + rmat);
      if (std::abs(s.determinant()) < 1e-300) throw singular_covariance();
      const Eigen::MatrixXd gain = p * h.transpose() * s.inverse();
      x += gain * resid;
      p = (Eigen::MatrixXd::Identity(dim, dim) - gain * h) * p;
      out.innovations.push_back({k, resid, s});
    }
    out.estimates.states.push_back(detail::to_state(x, t0 + static_cast<double>(k) * dt));
  }
  return out;
}

/// Prediction-error decomposition: sum of innovation Gaussian log-densities.
inline double log_likelihood(const dynamics_model& dyn, const measurement_model& meas,
                             const trajectory& observed) {
  const auto res = filter(dyn, meas, observed);
  double ll = 0.0;
  for (const auto& inn : res.innovations) {
    const double det = inn.covariance.determinant();
    if (det <= 0.0) throw singular_covariance();
    const double maha = inn.residual.dot(inn.covariance.inverse() * inn.residual);
    ll += -0.5 * (maha + std::log(det) + 2.0 * std::log(2.0 * std::numbers::pi));
  }
  return ll;
}

struct anomaly_result {
  std::vector<double> per_step;  // normalized innovation squared per update
  double aggregate = 0.0;        // mean of the top 5% per-step values
};

/// Innovation-based anomaly score. per_step is the Mahalanobis distance
/// squared divided by the innovation dimension, so model-consistent data
/// averages to one. The aggregate is a top-k mean (k = 5% of update steps)
/// so short bursts are not diluted.
inline anomaly_result anomaly_score(const dynamics_model& dyn, const measurement_model& meas,
                                    const trajectory& observed) {
  const auto res = filter(dyn, meas, observed);
  anomaly_result out;
  out.per_step.reserve(res.innovations.size());
  for (const auto& inn : res.innovations) {
    const double maha = inn.residual.dot(inn.covariance.inverse() * inn.residual);
    out.per_step.push_back(maha / 2.0);
  }
  if (out.per_step.empty()) return out;
  const std::size_t k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(out.per_step.size()))));
  std::vector<double> sorted = out.per_step;
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<long>(k), sorted.end(),
                    std::greater<>());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += sorted[i];
  out.aggregate = sum / static_cast<double>(k);
  return out;
}

}  // namespace ccm

#endif  // CCMINER_MODEL_HPP_
