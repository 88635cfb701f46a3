// Copyright 2026 The FOGAN Authors.
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

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "fogan/checks/checks.hpp"
#include "fogan/error.hpp"

namespace fogan::checks {

double brute_force_tau_p(const EmpiricalMeasure& p, const EmpiricalMeasure& q, double lambda) {
  const auto n = static_cast<Eigen::Index>(p.size());
  const auto m = static_cast<Eigen::Index>(q.size());
  const Eigen::Index t = n + m;
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(t, t);
  Eigen::VectorXd rhs(t);
  for (Eigen::Index i = 0; i < n; ++i) rhs(i) = p.weight(static_cast<std::size_t>(i));
  for (Eigen::Index j = 0; j < m; ++j) rhs(n + j) = -q.weight(static_cast<std::size_t>(j));
  std::vector<double> inv_dist(static_cast<std::size_t>(n * m));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      const double dist = std::max(euclidean(p.point(ui), q.point(uj)), kDistanceFloor);
      inv_dist[ui * static_cast<std::size_t>(m) + uj] = 1.0 / dist;
      const double w = p.weight(ui) * q.weight(uj) / dist;
      lap(i, i) += w;
      lap(n + j, n + j) += w;
      lap(i, n + j) -= w;
      lap(n + j, i) -= w;
    }
  }
  const Eigen::MatrixXd a = 2.0 * lambda * lap.topLeftCorner(t - 1, t - 1);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(t);
  f.head(t - 1) = a.ldlt().solve(rhs.head(t - 1));
  double penalty = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      const double df = f(i) - f(n + j);
      penalty += p.weight(ui) * q.weight(uj) * df * df * inv_dist[ui * static_cast<std::size_t>(m) + uj];
    }
  }
  return rhs.dot(f) - lambda * penalty;
}

CounterexampleDerivatives wgan_gp_counterexample(double theta0, double h) {
  if (!(theta0 > h) || !(h > 0.0)) throw UsageError("counterexample needs theta0 > h > 0");
  std::vector<double> nodes;
  std::vector<double> weights;
  gauss_legendre_unit(16, nodes, weights);
  auto slope = [](double theta) { return -(theta / 2.0 + 1.0); };

  // int_0^theta f_{theta0}(x) dx
  auto objective = [&](double theta) {
    double s = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) s += weights[k] * slope(theta0) * (theta * nodes[k]);
    return s * theta;
  };
  // E over x ~ U([0, theta]) and alpha ~ U([0, 1]) of (|f_theta'(alpha x)| - 1)^2,
  // with f_theta' taken from the tape.
  auto penalty = [&](double theta) {
    const double c = slope(theta);
    const Critic f([c](ad::Tape&, std::span<const ad::Var> x) { return c * x[0]; });
    double s = 0.0;
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      for (std::size_t b = 0; b < nodes.size(); ++b) {
        const double y = nodes[a] * (theta * nodes[b]);
        const double dev = std::abs(f.gradient_at(std::vector<double>{y})[0]) - 1.0;
        s += weights[a] * weights[b] * dev * dev;
      }
    }
    return s;
  };
  CounterexampleDerivatives d;
  d.d_objective = (objective(theta0 + h) - objective(theta0 - h)) / (2.0 * h);
  d.d_penalty = (penalty(theta0 + h) - penalty(theta0 - h)) / (2.0 * h);
  return d;
}

Critic cone_critic(Point apex, double apex_value, double slope) {
  return Critic([apex = std::move(apex), apex_value, slope](ad::Tape& tape, std::span<const ad::Var> x) {
    ad::Var sq = tape.constant(0.0);
    for (std::size_t k = 0; k < x.size(); ++k) {
      const ad::Var d = x[k] - apex[k];
      sq = sq + d * d;
    }
    return apex_value - slope * ad::sqrt(sq);
  });
}

double critic_loss_gradient_error(const Mlp& net, const DivergenceSpec& spec,
                                  const EmpiricalMeasure& p, const EmpiricalMeasure& q, double h,
                                  double tolerance) {
  ad::Tape tape;
  const auto params = net.bind_variables(tape);
  const Critic critic = mlp_critic(net, params);
  const auto nodes = build_divergence(tape, spec, VarMeasure::constant(tape, p), VarMeasure::constant(tape, q),
                                      critic, BuildOptions{});
  const auto grad = ad::grad_values(nodes.value, params);
  // A central difference resolves components only down to about
  // eps |L| / h. Below that scale over the tolerance a relative error is
  // noise; the output bias, whose gradient is exactly zero, is the usual case.
  const double eps = std::numeric_limits<double>::epsilon();
  const double floor = eps * std::max(1.0, std::abs(nodes.value.value())) / (h * tolerance);

  double worst = 0.0;
  std::vector<double> theta = net.params();
  Mlp probe = net;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double keep = theta[k];
    theta[k] = keep + h;
    probe.set_params(theta);
    const double up = estimate(spec, p, q, frozen_mlp_critic(probe)).value;
    theta[k] = keep - h;
    probe.set_params(theta);
    const double down = estimate(spec, p, q, frozen_mlp_critic(probe)).value;
    theta[k] = keep;
    const double fd = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(grad[k]), std::abs(fd), floor});
    worst = std::max(worst, std::abs(grad[k] - fd) / scale);
  }
  return worst;
}

}  // namespace fogan::checks
