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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ccminer/model.hpp"

namespace {

ccm::state init_state(double x, double y, double heading, double speed) {
  ccm::state s;
  s.x = x;
  s.y = y;
  s.heading = heading;
  s.speed = speed;
  return s;
}

ccm::trajectory clean_cv_track(double v, double dt, std::size_t n) {
  ccm::trajectory t;
  t.id = "cv";
  for (std::size_t i = 0; i < n; ++i) {
    ccm::state s;
    s.t = static_cast<double>(i) * dt;
    s.x = v * s.t;
    s.y = 0.0;
    t.states.push_back(s);
  }
  return t;
}

/// Independent batch estimator for the CV model. Unknowns are the initial
/// state and the per-step white-acceleration increments; the filtered
/// marginal at the last step is the weighted least-squares solution using
/// the same two-point prior the recursive filter starts from.
Eigen::Vector4d batch_filtered_marginal(const ccm::dynamics_model& dyn,
                                        const ccm::measurement_model& meas,
                                        const std::vector<std::optional<Eigen::Vector2d>>& z,
                                        std::size_t upto) {
  const double dt = dyn.dt;
  std::size_t ka = 0;
  while (!z[ka]) ++ka;
  std::size_t kb = ka + 1;
  while (!z[kb]) ++kb;
  const double span = static_cast<double>(kb - ka) * dt;

  const std::size_t steps = upto - kb;  // process increments w_kb .. w_{upto-1}
  const std::size_t dim = 4 + 2 * steps;

  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  Eigen::Matrix<double, 4, 2> g;
  g << 0.5 * dt * dt, 0, 0, 0.5 * dt * dt, dt, 0, 0, dt;

  // x_k = F^{k-kb} x0 + sum_m F^{k-1-m} G w_m; build jacobians by recursion
  std::vector<Eigen::MatrixXd> jac(steps + 1);
  jac[0] = Eigen::MatrixXd::Zero(4, dim);
  jac[0].leftCols<4>() = Eigen::Matrix4d::Identity();
  for (std::size_t k = 0; k < steps; ++k) {
    jac[k + 1] = f * jac[k];
    jac[k + 1].block<4, 2>(0, 4 + 2 * k) = g;
  }

  const double r_std = std::max(meas.position_noise_std, 1e-6);
  const double q_std = std::max(dyn.process_noise_x, 1e-9);

  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  const auto add_row = [&](const Eigen::RowVectorXd& row, double value) {
    rows.push_back(row);
    rhs.push_back(value);
  };

  // two-point prior on x0 (state at grid step kb)
  const double r = r_std * r_std;
  Eigen::Matrix4d p0 = Eigen::Matrix4d::Zero();
  for (int axis = 0; axis < 2; ++axis) {
    p0(axis, axis) = r;
    p0(axis, 2 + axis) = r / span;
    p0(2 + axis, axis) = r / span;
    p0(2 + axis, 2 + axis) = 2.0 * r / span / span;
  }
  Eigen::Vector4d mean;
  mean.head<2>() = *z[kb];
  mean.tail<2>() = (*z[kb] - *z[ka]) / span;
  const Eigen::Matrix4d w_prior = p0.inverse().llt().matrixL().transpose();
  for (int i = 0; i < 4; ++i) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(dim);
    row.head<4>() = w_prior.row(i);
    add_row(row, w_prior.row(i) * mean);
  }

  // process increments ~ N(0, q^2 I)
  for (std::size_t k = 0; k < steps; ++k)
    for (int axis = 0; axis < 2; ++axis) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(dim);
      row(4 + 2 * k + axis) = 1.0 / q_std;
      add_row(row, 0.0);
    }

  // measurements after the init step
  for (std::size_t k = kb + 1; k <= upto; ++k) {
    if (!z[k]) continue;
    for (int axis = 0; axis < 2; ++axis) {
      Eigen::RowVectorXd row = jac[k - kb].row(axis) / r_std;
      add_row(row, (*z[k])(axis) / r_std);
    }
  }

  Eigen::MatrixXd a(rows.size(), dim);
  Eigen::VectorXd b(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    a.row(static_cast<long>(i)) = rows[i];
    b(static_cast<long>(i)) = rhs[i];
  }
  const Eigen::VectorXd u = (a.transpose() * a).ldlt().solve(a.transpose() * b);
  return jac[steps] * u;
}

}  // namespace

TEST_CASE("noise-free constant-velocity simulation is exact") {
  ccm::dynamics_model dyn;
  dyn.process_noise_x = dyn.process_noise_y = 0.0;
  ccm::measurement_model meas;
  meas.position_noise_std = 0.0;
  const auto [latent, observed] =
      ccm::simulate(dyn, meas, {}, {}, init_state(0, 0, 0, 10.0), {}, 11, 1);
  REQUIRE(latent.states.size() == 11);
  for (std::size_t i = 0; i < 11; ++i) {
    REQUIRE(latent.states[i].x == Catch::Approx(static_cast<double>(i)).margin(1e-12));
    REQUIRE(latent.states[i].y == Catch::Approx(0.0).margin(1e-12));
  }
  REQUIRE(observed.states.size() == 11);
}

TEST_CASE("simulation is deterministic per seed") {
  ccm::dynamics_model dyn;
  ccm::measurement_model meas;
  meas.dropout_prob = 0.2;
  const auto a = ccm::simulate(dyn, meas, {}, {}, init_state(0, 0, 0.3, 8.0), {}, 50, 99);
  const auto b = ccm::simulate(dyn, meas, {}, {}, init_state(0, 0, 0.3, 8.0), {}, 50, 99);
  REQUIRE(a.first.states.size() == b.first.states.size());
  REQUIRE(a.second.states.size() == b.second.states.size());
  for (std::size_t i = 0; i < a.second.states.size(); ++i) {
    REQUIRE(a.second.states[i].x == b.second.states[i].x);
    REQUIRE(a.second.states[i].y == b.second.states[i].y);
  }
}

TEST_CASE("occlusion intervals force dropout") {
  ccm::dynamics_model dyn;
  dyn.process_noise_x = dyn.process_noise_y = 0.0;
  ccm::measurement_model meas;
  meas.position_noise_std = 0.01;
  ccm::measurement_context ctx;
  ctx.occlusion_intervals = {{0.3, 0.5}};
  const auto [latent, observed] =
      ccm::simulate(dyn, meas, {}, ctx, init_state(0, 0, 0, 10.0), {}, 11, 1);
  REQUIRE(observed.states.size() == 8);
  for (const auto& s : observed.states) {
    REQUIRE((s.t < 0.3 - 1e-9 || s.t > 0.5 + 1e-9));
  }
}

TEST_CASE("simulate validates lengths") {
  ccm::dynamics_model dyn;
  ccm::measurement_model meas;
  REQUIRE_THROWS_AS(ccm::simulate(dyn, meas, {}, {}, init_state(0, 0, 0, 1), {}, 1, 0),
                    ccm::bad_length);
  std::vector<ccm::control_input> controls(3);
  REQUIRE_THROWS_AS(ccm::simulate(dyn, meas, {}, {}, init_state(0, 0, 0, 1), controls, 10, 0),
                    ccm::bad_length);
}

TEST_CASE("filter on model-consistent noise-free data has zero innovations") {
  ccm::dynamics_model dyn;
  ccm::measurement_model meas;
  const auto track = clean_cv_track(10.0, dyn.dt, 50);
  const auto res = ccm::filter(dyn, meas, track);
  REQUIRE(!res.innovations.empty());
  for (const auto& inn : res.innovations) REQUIRE(inn.residual.norm() <= 1e-9);
}

TEST_CASE("a missing sample is bridged by pure prediction") {
  ccm::dynamics_model dyn;
  ccm::measurement_model meas;
  auto track = clean_cv_track(10.0, dyn.dt, 30);
  track.states.erase(track.states.begin() + 15);
  const auto res = ccm::filter(dyn, meas, track);
  // with exact data the predicted gap state continues the constant velocity
  const auto& gap = res.estimates.states[14];  // grid step 15, first estimate at step 1
  REQUIRE(gap.t == Catch::Approx(1.5));
  REQUIRE(gap.x == Catch::Approx(15.0).margin(1e-6));
}

TEST_CASE("filter matches the batch least-squares oracle") {
  std::mt19937_64 seeds(2026);
  for (int scenario = 0; scenario < 20; ++scenario) {
    ccm::dynamics_model dyn;
    dyn.process_noise_x = dyn.process_noise_y = 0.4;
    ccm::measurement_model meas;
    meas.position_noise_std = 0.3;
    const auto seed = seeds();
    const auto [latent, observed] = ccm::simulate(
        dyn, meas, {}, {}, init_state(0, 0, 0.2, 8.0), {}, 50, seed);
    const auto res = ccm::filter(dyn, meas, observed);

    std::vector<std::optional<Eigen::Vector2d>> z(50);
    for (const auto& s : observed.states) {
      const auto k = static_cast<std::size_t>(std::llround(s.t / dyn.dt));
      z[k] = Eigen::Vector2d(s.x, s.y);
    }
    // compare the filtered marginal at a few grid steps, including the last
    for (std::size_t upto : {10UL, 25UL, 49UL}) {
      const Eigen::Vector4d want = batch_filtered_marginal(dyn, meas, z, upto);
      const auto& got = res.estimates.states[upto - 1];  // estimates start at step 1
      REQUIRE(got.x == Catch::Approx(want(0)).margin(1e-6));
      REQUIRE(got.y == Catch::Approx(want(1)).margin(1e-6));
      const double vx = *got.speed * std::cos(got.heading);
      const double vy = *got.speed * std::sin(got.heading);
      REQUIRE(vx == Catch::Approx(want(2)).margin(1e-6));
      REQUIRE(vy == Catch::Approx(want(3)).margin(1e-6));
    }
  }
}

TEST_CASE("gross perturbation lowers the log-likelihood") {
  ccm::dynamics_model dyn;
  ccm::measurement_model meas;
  const auto [latent, observed] =
      ccm::simulate(dyn, meas, {}, {}, init_state(0, 0, 0, 10.0), {}, 60, 5);
  auto perturbed = observed;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> gauss(0.0, 5.0 * meas.position_noise_std);
  for (auto& s : perturbed.states) {
    s.x += gauss(rng);
    s.y += gauss(rng);
  }
  REQUIRE(ccm::log_likelihood(dyn, meas, perturbed) <
          ccm::log_likelihood(dyn, meas, observed));
}

TEST_CASE("log-likelihood of a single update matches the hand formula") {
  // three observations: the first two initialize, the third is one update
  ccm::dynamics_model dyn;
  ccm::measurement_model meas;
  auto track = clean_cv_track(10.0, dyn.dt, 3);
  track.states[2].x += 0.7;  // known innovation in x
  const auto res = ccm::filter(dyn, meas, track);
  REQUIRE(res.innovations.size() == 1);
  const auto& inn = res.innovations[0];
  // 2x2 inverse and determinant by the explicit cofactor formulas
  const auto& s = inn.covariance;
  const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  const double maha = (s(1, 1) * inn.residual(0) * inn.residual(0) -
                       2.0 * s(0, 1) * inn.residual(0) * inn.residual(1) +
                       s(0, 0) * inn.residual(1) * inn.residual(1)) /
                      det;
  const double want =
      -0.5 * (maha + std::log(det) + 2.0 * std::log(2.0 * std::numbers::pi));
  REQUIRE(ccm::log_likelihood(dyn, meas, track) == Catch::Approx(want).margin(1e-12));
}

TEST_CASE("log-likelihood is a pure function") {
  ccm::dynamics_model dyn;
  ccm::measurement_model meas;
  const auto [latent, observed] =
      ccm::simulate(dyn, meas, {}, {}, init_state(0, 0, 0, 10.0), {}, 40, 11);
  REQUIRE(ccm::log_likelihood(dyn, meas, observed) ==
          ccm::log_likelihood(dyn, meas, observed));
}

TEST_CASE("anomaly score is zero on model-consistent noise-free data") {
  ccm::dynamics_model dyn;
  ccm::measurement_model meas;
  const auto score = ccm::anomaly_score(dyn, meas, clean_cv_track(10.0, dyn.dt, 50));
  REQUIRE(score.aggregate == Catch::Approx(0.0).margin(1e-15));
  for (double v : score.per_step) REQUIRE(v <= 1e-15);
}

TEST_CASE("a teleport dominates the per-step score and the clean population") {
  ccm::dynamics_model dyn;
  ccm::measurement_model meas;

  std::vector<double> clean;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto obs =
        ccm::simulate(dyn, meas, {}, {}, init_state(0, 0, 0, 10.0), {}, 80, seed).second;
    clean.push_back(ccm::anomaly_score(dyn, meas, obs).aggregate);
  }
  std::sort(clean.begin(), clean.end());
  const double p99 = clean[989];

  auto obs =
      ccm::simulate(dyn, meas, {}, {}, init_state(0, 0, 0, 10.0), {}, 80, 4242).second;
  const std::size_t j = obs.states.size() / 2;
  obs.states[j].y += 10.0 * meas.position_noise_std;
  const auto score = ccm::anomaly_score(dyn, meas, obs);
  const auto peak =
      std::max_element(score.per_step.begin(), score.per_step.end()) - score.per_step.begin();
  // the spike lands at the teleported update (j minus the two init steps)
  REQUIRE(static_cast<std::size_t>(peak) == j - 2);
  REQUIRE(score.aggregate > p99);
}

TEST_CASE("anomaly aggregate is invariant under time translation") {
  ccm::dynamics_model dyn;
  ccm::measurement_model meas;
  auto obs = ccm::simulate(dyn, meas, {}, {}, init_state(0, 0, 0, 10.0), {}, 60, 77).second;
  const double before = ccm::anomaly_score(dyn, meas, obs).aggregate;
  for (auto& s : obs.states) s.t += 1234.5;
  REQUIRE(ccm::anomaly_score(dyn, meas, obs).aggregate == Catch::Approx(before));
}

TEST_CASE("log-likelihood decreases monotonically with added noise") {
  ccm::dynamics_model dyn;
  ccm::measurement_model meas;
  int monotone = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto obs =
        ccm::simulate(dyn, meas, {}, {}, init_state(0, 0, 0, 10.0), {}, 60, seed).second;
    std::vector<double> lls;
    for (double scale : {0.0, 1.0, 2.0, 4.0}) {
      auto noisy = obs;
      std::mt19937_64 rng(seed + 1);
      std::normal_distribution<double> gauss(0.0, scale * meas.position_noise_std);
      if (scale > 0.0)
        for (auto& s : noisy.states) {
          s.x += gauss(rng);
          s.y += gauss(rng);
        }
      lls.push_back(ccm::log_likelihood(dyn, meas, noisy));
    }
    if (std::is_sorted(lls.rbegin(), lls.rend())) ++monotone;
  }
  REQUIRE(monotone >= 19);
}

TEST_CASE("filtering does not degrade below the raw measurement error") {
  ccm::dynamics_model dyn;
  ccm::measurement_model meas;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto [latent, observed] =
        ccm::simulate(dyn, meas, {}, {}, init_state(0, 0, 0.1, 9.0), {}, 100, seed);
    const auto res = ccm::filter(dyn, meas, observed);
    double raw = 0.0, est = 0.0;
    std::size_t n_raw = 0, n_est = 0;
    for (const auto& s : observed.states) {
      const auto k = static_cast<std::size_t>(std::llround(s.t / dyn.dt));
      raw += std::pow(s.x - latent.states[k].x, 2) + std::pow(s.y - latent.states[k].y, 2);
      ++n_raw;
    }
    for (const auto& s : res.estimates.states) {
      const auto k = static_cast<std::size_t>(std::llround(s.t / dyn.dt));
      est += std::pow(s.x - latent.states[k].x, 2) + std::pow(s.y - latent.states[k].y, 2);
      ++n_est;
    }
    REQUIRE(std::sqrt(est / static_cast<double>(n_est)) <=
            std::sqrt(raw / static_cast<double>(n_raw)) + 1e-12);
  }
}

TEST_CASE("coordinated-turn transition follows the commanded yaw rate") {
  ccm::dynamics_model dyn;
  dyn.kind = ccm::dynamics_kind::coordinated_turn;
  dyn.nominal_yaw_rate = 0.5;
  dyn.process_noise_x = dyn.process_noise_y = 0.0;
  ccm::measurement_model meas;
  meas.position_noise_std = 0.0;
  const auto latent =
      ccm::simulate(dyn, meas, {}, {}, init_state(0, 0, 0, 10.0), {}, 200, 0).first;
  // speed is preserved by the rotation
  for (const auto& s : latent.states)
    REQUIRE(*s.speed == Catch::Approx(10.0).margin(1e-9));
  // radius = v / omega = 20 m: positions stay on that circle around (0, 20)
  for (const auto& s : latent.states) {
    const double rr = std::hypot(s.x - 0.0, s.y - 20.0);
    REQUIRE(rr == Catch::Approx(20.0).epsilon(0.01));
  }
}
