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

#include "fogan/critic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "fogan/error.hpp"

namespace fogan {

using ad::Var;

namespace {

void check_pair(const EmpiricalMeasure& p, const EmpiricalMeasure& q) {
  if (p.dim() != q.dim()) throw ShapeError("p and q must share a dimension");
}

void check_critic(const TabularCritic& c, const EmpiricalMeasure& p, const EmpiricalMeasure& q) {
  if (c.p_count != p.size() || c.q_count() != q.size() || c.values.size() != c.support.size()) {
    throw ShapeError("tabular critic does not match the measures");
  }
}

// Floored distances, row-major |p| x |q|.
std::vector<double> floored_distances(const EmpiricalMeasure& p, const EmpiricalMeasure& q) {
  auto d = pairwise_distances(p, q).data;
  for (double& x : d) x = std::max(x, kDistanceFloor);
  return d;
}

}  // namespace

TabularCritic TabularCritic::from_values(const EmpiricalMeasure& p, const EmpiricalMeasure& q,
                                         std::vector<double> values, double lambda) {
  check_pair(p, q);
  if (values.size() != p.size() + q.size()) throw ShapeError("one value per support point required");
  TabularCritic c;
  c.support = p.points();
  c.support.insert(c.support.end(), q.points().begin(), q.points().end());
  c.values = std::move(values);
  c.p_count = p.size();
  c.lambda = lambda;
  return c;
}

TabularCritic apply_T(const TabularCritic& critic, const EmpiricalMeasure& p,
                      const EmpiricalMeasure& q, double lambda) {
  check_pair(p, q);
  check_critic(critic, p, q);
  if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
  const double c = 1.0 / (2.0 * lambda);
  const auto d = floored_distances(p, q);
  const std::size_t m = q.size();
  TabularCritic out = critic;
  out.lambda = lambda;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double w = q.weight(j) / d[i * m + j];
      num += w * critic.q_value(j);
      den += w;
    }
    if (!(den > 0.0)) throw NumericError("apply_T: zero denominator");
    out.values[i] = (num + c) / den;
  }
  for (std::size_t j = 0; j < m; ++j) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double w = p.weight(i) / d[i * m + j];
      num += w * critic.p_value(i);
      den += w;
    }
    if (!(den > 0.0)) throw NumericError("apply_T: zero denominator");
    out.values[p.size() + j] = (num - c) / den;
  }
  return out;
}

double normalizer(const TabularCritic& critic, const EmpiricalMeasure& p, const EmpiricalMeasure& q) {
  check_pair(p, q);
  check_critic(critic, p, q);
  const auto d = floored_distances(p, q);
  const std::size_t m = q.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      acc += p.weight(i) * q.weight(j) * (critic.p_value(i) - critic.q_value(j)) / d[i * m + j];
    }
  }
  return acc;
}

TabularCritic apply_S(const TabularCritic& critic, const EmpiricalMeasure& p,
                      const EmpiricalMeasure& q, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
  const double n = normalizer(critic, p, q);
  if (n == 0.0 || !std::isfinite(n)) {
    throw DegenerateCriticError("normalizer is zero; S is undefined for this critic");
  }
  TabularCritic out = critic;
  out.lambda = lambda;
  const double scale = 1.0 / (2.0 * lambda * n);
  for (double& v : out.values) v *= scale;
  return out;
}

std::pair<double, double> slope_residuals(const TabularCritic& critic, const EmpiricalMeasure& p,
                                          const EmpiricalMeasure& q, double lambda) {
  check_pair(p, q);
  check_critic(critic, p, q);
  const double c = 1.0 / (2.0 * lambda);
  const auto d = floored_distances(p, q);
  const std::size_t m = q.size();
  double res_p = 0.0;
  double res_q = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      s += q.weight(j) * (critic.p_value(i) - critic.q_value(j)) / d[i * m + j];
    }
    res_p = std::max(res_p, std::abs(s - c));
  }
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      s += p.weight(i) * (critic.p_value(i) - critic.q_value(j)) / d[i * m + j];
    }
    res_q = std::max(res_q, std::abs(s - c));
  }
  return {res_p, res_q};
}

double tau_p_value(const TabularCritic& critic, const EmpiricalMeasure& p,
                   const EmpiricalMeasure& q, double lambda) {
  check_pair(p, q);
  check_critic(critic, p, q);
  const auto d = floored_distances(p, q);
  const std::size_t m = q.size();
  double objective = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) objective += p.weight(i) * critic.p_value(i);
  for (std::size_t j = 0; j < m; ++j) objective -= q.weight(j) * critic.q_value(j);
  double penalty = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double df = critic.p_value(i) - critic.q_value(j);
      penalty += p.weight(i) * q.weight(j) * df * df / d[i * m + j];
    }
  }
  return objective - lambda * penalty;
}

namespace {

// Shifts values so that E_p E_q [f(x') / |x - x'|] = 0.
void normalize_shift(TabularCritic& c, const EmpiricalMeasure& p, const EmpiricalMeasure& q) {
  const auto d = floored_distances(p, q);
  const std::size_t m = q.size();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double w = p.weight(i) * q.weight(j) / d[i * m + j];
      num += w * c.q_value(j);
      den += w;
    }
  }
  const double shift = -num / den;
  for (double& v : c.values) v += shift;
}

TabularCritic seed_critic(const EmpiricalMeasure& p, const EmpiricalMeasure& q, double lambda) {
  std::vector<double> first;
  for (const auto& x : p.points()) first.push_back(x[0]);
  for (const auto& x : q.points()) first.push_back(x[0]);
  TabularCritic c = TabularCritic::from_values(p, q, first, lambda);
  normalize_shift(c, p, q);
  try {
    return apply_S(c, p, q, lambda);
  } catch (const DegenerateCriticError&) {
    // First coordinates do not separate the supports; use the indicator.
    for (std::size_t k = 0; k < c.values.size(); ++k) c.values[k] = k < p.size() ? 1.0 : 0.0;
    normalize_shift(c, p, q);
    return apply_S(c, p, q, lambda);
  }
}

}  // namespace

std::pair<TabularCritic, FixedPointReport> solve_optimal_critic(const EmpiricalMeasure& p,
                                                                const EmpiricalMeasure& q,
                                                                double lambda, double tolerance,
                                                                int max_iters) {
  check_pair(p, q);
  if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
  if (!(tolerance > 0.0)) throw UsageError("tolerance must be > 0");
  if (max_iters < 1) throw UsageError("max_iters must be >= 1");
  FixedPointReport report;
  TabularCritic f = seed_critic(p, q, lambda);
  for (int it = 0; it < max_iters; ++it) {
    TabularCritic next = apply_T(apply_S(f, p, q, lambda), p, q, lambda);
    double delta = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k) {
      delta = std::max(delta, std::abs(next.values[k] - f.values[k]));
    }
    f = std::move(next);
    report.iterations = it + 1;
    report.deltas.push_back(delta);
    report.final_delta = delta;
    if (!std::isfinite(delta)) throw NumericError("fixed-point iteration diverged");
    if (delta <= tolerance) {
      report.converged = true;
      break;
    }
  }
  normalize_shift(f, p, q);
  // Geometric rate from the log-linear trend of the recorded deltas.
  std::vector<double> logs;
  for (double d : report.deltas) {
    if (d > 0.0) logs.push_back(std::log(d));
  }
  if (logs.size() >= 3) {
    const double k = static_cast<double>(logs.size() - 1);
    report.contraction_rate = std::exp((logs.back() - logs[1]) / std::max(1.0, k - 1.0));
  }
  const auto [rp, rq] = slope_residuals(f, p, q, lambda);
  report.slope_residual_p = rp;
  report.slope_residual_q = rq;
  return {std::move(f), report};
}

// ---------------------------------------------------------------------------

ExtendedCritic::ExtendedCritic(TabularCritic critic, EmpiricalMeasure p, EmpiricalMeasure q)
    : critic_(std::move(critic)), p_(std::move(p)), q_(std::move(q)) {
  check_pair(p_, q_);
  check_critic(critic_, p_, q_);
  if (!(critic_.lambda > 0.0)) throw DomainError("extension needs the critic's lambda > 0");
}

namespace {

// (sum_k w_k f_k / d_k + offset) / sum_k w_k / d_k at y.
Var weighted_branch(ad::Tape& tape, std::span<const Var> y, const EmpiricalMeasure& anchors,
                    std::span<const double> values, double offset) {
  std::vector<Var> num;
  std::vector<Var> den;
  std::vector<Var> diff(y.size());
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    for (std::size_t c = 0; c < y.size(); ++c) diff[c] = y[c] - anchors.point(k)[c];
    const Var d = ad::max(ad::sqrt(ad::dot(diff, diff)), kDistanceFloor);
    const Var w = ad::reciprocal(d) * anchors.weight(k);
    num.push_back(w * values[k]);
    den.push_back(w);
  }
  return (tape.nary_sum(num) + offset) / tape.nary_sum(den);
}

std::ptrdiff_t nearest_within(const EmpiricalMeasure& m, std::span<const double> y, double radius) {
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (euclidean(m.point(k), y) <= radius) return static_cast<std::ptrdiff_t>(k);
  }
  return -1;
}

}  // namespace

CriticEval ExtendedCritic::build(ad::Tape& tape, std::span<const Var> query) const {
  const auto y = differentiable_inputs(tape, query);
  if (y.size() != static_cast<std::size_t>(p_.dim())) throw ShapeError("query dimension mismatch");
  std::vector<double> yv;
  for (const Var& v : y) yv.push_back(v.value());
  const double c = 1.0 / (2.0 * critic_.lambda);
  const std::span<const double> fp(critic_.values.data(), critic_.p_count);
  const std::span<const double> fq(critic_.values.data() + critic_.p_count, critic_.q_count());

  Var value;
  const auto near_p = nearest_within(p_, yv, kDistanceFloor);
  if (near_p >= 0) {
    if (nearest_within(q_, yv, 2.0 * kDistanceFloor) >= 0) {
      throw NumericError("query sits on a clamped-distance singularity");
    }
    const Var h = weighted_branch(tape, y, q_, fq, c);
    value = h + (fp[static_cast<std::size_t>(near_p)] - h.value());
  } else {
    const Var h = weighted_branch(tape, y, p_, fp, -c);
    const auto near_q = nearest_within(q_, yv, kDistanceFloor);
    value = near_q >= 0 ? h + (fq[static_cast<std::size_t>(near_q)] - h.value()) : h;
  }
  return CriticEval{value, ad::grad(value, y).nodes};
}

double ExtendedCritic::value(std::span<const double> y) const {
  ad::Tape tape;
  const auto ys = tape.variables(y);
  return build(tape, ys).value.value();
}

std::vector<double> ExtendedCritic::gradient(std::span<const double> y) const {
  ad::Tape tape;
  const auto ys = tape.variables(y);
  const auto ev = build(tape, ys);
  std::vector<double> g;
  for (const Var& v : ev.gradient) g.push_back(v.value());
  return g;
}

Critic ExtendedCritic::as_critic() const {
  auto self = std::make_shared<ExtendedCritic>(*this);
  return Critic([self](ad::Tape& tape, std::span<const Var> y) { return self->build(tape, y).value; },
                [self](ad::Tape& tape, std::span<const Var> y) { return self->build(tape, y); });
}

ExtendedCritic extend_critic_c1(const TabularCritic& critic, const EmpiricalMeasure& p,
                                const EmpiricalMeasure& q) {
  return ExtendedCritic(critic, p, q);
}

}  // namespace fogan
