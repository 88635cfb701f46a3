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

#include "fogan/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "fogan/error.hpp"

namespace fogan {

using ad::Var;

std::string to_string(DivergenceKind k) {
  switch (k) {
    case DivergenceKind::ClassicGan: return "classic_gan";
    case DivergenceKind::WganGp: return "wgan_gp";
    case DivergenceKind::PenalizedW: return "penalized_w";
    case DivergenceKind::FirstOrderPW: return "fogan";
  }
  return "unknown";
}

DivergenceKind parse_divergence_kind(const std::string& name) {
  if (name == "classic_gan" || name == "gan") return DivergenceKind::ClassicGan;
  if (name == "wgan_gp" || name == "wgan-gp") return DivergenceKind::WganGp;
  if (name == "penalized_w" || name == "pw") return DivergenceKind::PenalizedW;
  if (name == "fogan" || name == "first_order_pw") return DivergenceKind::FirstOrderPW;
  throw ConfigError("unknown divergence '" + name + "'");
}

void DivergenceSpec::validate() const {
  switch (kind) {
    case DivergenceKind::ClassicGan:
      break;
    case DivergenceKind::WganGp:
      if (!(gp_weight >= 0.0)) throw DomainError("gp_weight must be >= 0");
      break;
    case DivergenceKind::PenalizedW:
      if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
      break;
    case DivergenceKind::FirstOrderPW:
      if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
      if (!(mu > 0.0)) throw DomainError("mu must be > 0");
      break;
  }
}

// ---------------------------------------------------------------------------

Critic::Critic(ValueFn value) : value_(std::move(value)) {}

Critic::Critic(ValueFn value, GradFn value_and_gradient)
    : value_(std::move(value)), value_and_gradient_(std::move(value_and_gradient)) {}

Var Critic::value(ad::Tape& tape, std::span<const Var> x) const {
  if (!value_) throw UsageError("critic has no value function");
  return value_(tape, x);
}

std::vector<Var> differentiable_inputs(ad::Tape& tape, std::span<const Var> x) {
  // Constant inputs would fold the whole critic into a constant.
  std::vector<Var> out(x.begin(), x.end());
  for (Var& v : out) {
    if (tape.is_constant(v.index)) v = tape.variable(v.value());
  }
  return out;
}

CriticEval Critic::value_and_gradient(ad::Tape& tape, std::span<const Var> x) const {
  if (value_and_gradient_) return value_and_gradient_(tape, x);
  const auto xs = differentiable_inputs(tape, x);
  const Var v = value(tape, xs);
  return CriticEval{v, ad::grad(v, xs).nodes};
}

double Critic::value_at(std::span<const double> x) const {
  ad::Tape tape;
  const auto xs = tape.variables(x);
  return value(tape, xs).value();
}

std::vector<double> Critic::gradient_at(std::span<const double> x) const {
  ad::Tape tape;
  const auto xs = tape.variables(x);
  const auto ev = value_and_gradient(tape, xs);
  std::vector<double> g;
  for (const Var& v : ev.gradient) g.push_back(v.value());
  return g;
}

Critic mlp_critic(const Mlp& net, std::vector<Var> params) {
  auto shared = std::make_shared<std::pair<Mlp, std::vector<Var>>>(net, std::move(params));
  return Critic(
      [shared](ad::Tape& tape, std::span<const Var> x) {
        return shared->first.forward_scalar(tape, shared->second, x);
      },
      [shared](ad::Tape& tape, std::span<const Var> x) {
        auto vg = shared->first.value_and_input_gradient(tape, shared->second, x);
        return CriticEval{vg.value, std::move(vg.gradient)};
      });
}

Critic frozen_mlp_critic(const Mlp& net) {
  struct State {
    Mlp net;
    std::uint64_t generation = 0;
    ad::Tape* tape = nullptr;
    std::vector<Var> params;

    std::span<const Var> bind(ad::Tape& t) {
      if (tape != &t || generation != t.generation()) {
        tape = &t;
        generation = t.generation();
        params = net.bind_constants(t);
      }
      return params;
    }
  };
  auto state = std::make_shared<State>();
  state->net = net;
  return Critic(
      [state](ad::Tape& tape, std::span<const Var> x) {
        return state->net.forward_scalar(tape, state->bind(tape), x);
      },
      [state](ad::Tape& tape, std::span<const Var> x) {
        auto vg = state->net.value_and_input_gradient(tape, state->bind(tape), x);
        return CriticEval{vg.value, std::move(vg.gradient)};
      });
}

Critic sigmoid_mlp_critic(const Mlp& net, std::vector<Var> params) {
  auto shared = std::make_shared<std::pair<Mlp, std::vector<Var>>>(net, std::move(params));
  return Critic(
      [shared](ad::Tape& tape, std::span<const Var> x) {
        return ad::sigmoid(shared->first.forward_scalar(tape, shared->second, x));
      },
      [shared](ad::Tape& tape, std::span<const Var> x) {
        auto vg = shared->first.value_and_input_gradient(tape, shared->second, x);
        const Var s = ad::sigmoid(vg.value);
        const Var slope = s * (1.0 - s);
        CriticEval ev{s, {}};
        for (const Var& g : vg.gradient) ev.gradient.push_back(slope * g);
        return ev;
      });
}

VarMeasure VarMeasure::constant(ad::Tape& tape, const EmpiricalMeasure& m) {
  VarMeasure out;
  out.weights = m.weights();
  out.points.reserve(m.size());
  for (const auto& p : m.points()) {
    std::vector<Var> row;
    row.reserve(p.size());
    for (double c : p) row.push_back(tape.constant(c));
    out.points.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------

void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw UsageError("Gauss-Legendre rule needs n >= 1");
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  const double pi = 3.141592653589793;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    nodes[lo] = 0.5 * (1.0 - x);
    nodes[hi] = 0.5 * (1.0 + x);
    weights[lo] = 0.5 * w;
    weights[hi] = 0.5 * w;
  }
}

InterpolationPlan InterpolationPlan::quadrature(const std::vector<double>& pw,
                                                const std::vector<double>& qw, int nodes) {
  std::vector<double> a;
  std::vector<double> w;
  gauss_legendre_unit(nodes, a, w);
  InterpolationPlan plan;
  plan.entries.reserve(pw.size() * qw.size() * a.size());
  for (std::size_t i = 0; i < pw.size(); ++i) {
    for (std::size_t j = 0; j < qw.size(); ++j) {
      for (std::size_t k = 0; k < a.size(); ++k) {
        plan.entries.push_back(Entry{i, j, a[k], pw[i] * qw[j] * w[k]});
      }
    }
  }
  return plan;
}

InterpolationPlan InterpolationPlan::monte_carlo(const EmpiricalMeasure& p,
                                                 const EmpiricalMeasure& q, std::size_t count,
                                                 Rng& rng) {
  if (count < 1) throw UsageError("interpolation count must be >= 1");
  InterpolationPlan plan;
  plan.entries.reserve(count);
  const double w = 1.0 / static_cast<double>(count);
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t i = draw_index(p, rng);
    const std::size_t j = draw_index(q, rng);
    plan.entries.push_back(Entry{i, j, rng.uniform(), w});
  }
  return plan;
}

namespace {

Var smoothed_norm(ad::Tape& tape, std::span<const Var> v, double smoothing) {
  Var sq = ad::dot(v, v);
  if (smoothing > 0.0) sq = sq + smoothing * smoothing;
  (void)tape;
  return ad::sqrt(sq);
}

}  // namespace

DivergenceNodes build_divergence(ad::Tape& tape, const DivergenceSpec& spec, const VarMeasure& p,
                                 const VarMeasure& q, const Critic& critic,
                                 const BuildOptions& options) {
  spec.validate();
  if (p.size() == 0 || q.size() == 0) throw ShapeError("measures must be non-empty");
  const std::size_t n = p.points.front().size();
  for (const auto& x : p.points) {
    if (x.size() != n) throw ShapeError("point dimension mismatch");
  }
  for (const auto& x : q.points) {
    if (x.size() != n) throw ShapeError("point dimension mismatch");
  }

  DivergenceNodes out;
  const Var zero = tape.constant(0.0);
  out.penalty_lambda = zero;
  out.penalty_mu = zero;
  out.penalty_gp = zero;

  const bool first_order = spec.kind == DivergenceKind::FirstOrderPW;
  std::vector<Var> fp;
  std::vector<Var> fq;
  std::vector<std::vector<Var>> grad_q;
  for (const auto& x : p.points) fp.push_back(critic.value(tape, x));
  for (const auto& x : q.points) {
    if (first_order) {
      auto ev = critic.value_and_gradient(tape, x);
      if (ev.gradient.size() != n) throw ShapeError("critic gradient has the wrong dimension");
      fq.push_back(ev.value);
      grad_q.push_back(std::move(ev.gradient));
    } else {
      fq.push_back(critic.value(tape, x));
    }
  }

  std::vector<Var> terms;
  if (spec.kind == DivergenceKind::ClassicGan) {
    for (const Var& v : fp) {
      if (!(v.value() > 0.0 && v.value() < 1.0)) throw DomainError("classic GAN critic must lie in (0,1)");
    }
    for (const Var& v : fq) {
      if (!(v.value() > 0.0 && v.value() < 1.0)) throw DomainError("classic GAN critic must lie in (0,1)");
    }
    for (std::size_t i = 0; i < fp.size(); ++i) terms.push_back(ad::log(fp[i]) * p.weights[i]);
    for (std::size_t j = 0; j < fq.size(); ++j) terms.push_back(ad::log(1.0 - fq[j]) * q.weights[j]);
  } else {
    for (std::size_t i = 0; i < fp.size(); ++i) terms.push_back(fp[i] * p.weights[i]);
    for (std::size_t j = 0; j < fq.size(); ++j) terms.push_back(fq[j] * (-q.weights[j]));
  }
  out.objective = tape.nary_sum(terms);

  if (spec.kind == DivergenceKind::PenalizedW || first_order) {
    // inv_d(i, j) = 1 / max(|x_i - x'_j|, floor). Pairs of constant points
    // get their distance computed directly instead of on the tape.
    auto constant_point = [&tape](const std::vector<Var>& x) {
      for (const Var& c : x) {
        if (!tape.is_constant(c.index)) return false;
      }
      return true;
    };
    std::vector<char> p_const(p.size());
    std::vector<char> q_const(q.size());
    for (std::size_t i = 0; i < p.size(); ++i) p_const[i] = constant_point(p.points[i]);
    for (std::size_t j = 0; j < q.size(); ++j) q_const[j] = constant_point(q.points[j]);
    std::vector<Var> inv_d(p.size() * q.size());
    std::vector<Var> diff(n);
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = 0; j < q.size(); ++j) {
        if (p_const[i] && q_const[j]) {
          double sq = 0.0;
          for (std::size_t k = 0; k < n; ++k) {
            const double e = p.points[i][k].value() - q.points[j][k].value();
            sq += e * e;
          }
          double d = std::sqrt(sq);
          if (d < kDistanceFloor) {
            out.clamped = true;
            d = kDistanceFloor;
          }
          inv_d[i * q.size() + j] = tape.constant(1.0 / d);
          continue;
        }
        for (std::size_t k = 0; k < n; ++k) diff[k] = p.points[i][k] - q.points[j][k];
        Var d = ad::sqrt(ad::dot(diff, diff));
        if (d.value() < kDistanceFloor) {
          out.clamped = true;
          d = ad::max(d, kDistanceFloor);
        }
        inv_d[i * q.size() + j] = ad::reciprocal(d);
      }
    }
    std::vector<Var> df(p.size() * q.size());
    terms.clear();
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = 0; j < q.size(); ++j) {
        const Var delta = fp[i] - fq[j];
        df[i * q.size() + j] = delta;
        terms.push_back((delta * delta) * (inv_d[i * q.size() + j] * (p.weights[i] * q.weights[j])));
      }
    }
    out.penalty_lambda = tape.nary_sum(terms) * spec.lambda;

    if (first_order) {
      terms.clear();
      // v_j = sum_i w_i (x_i - x'_j) df_ij / d_ij^3
      //     = sum_i a_ij x_i - x'_j sum_i a_ij,  a_ij = w_i df_ij / d_ij^3.
      std::vector<Var> a(p.size());
      std::vector<Var> wsum(p.size());
      std::vector<Var> coord(p.size());
      std::vector<Var> v(n);
      for (std::size_t j = 0; j < q.size(); ++j) {
        for (std::size_t i = 0; i < p.size(); ++i) {
          const Var id = inv_d[i * q.size() + j];
          a[i] = df[i * q.size() + j] * ((id * id * id) * p.weights[i]);
          wsum[i] = id * p.weights[i];
        }
        const Var a_total = tape.nary_sum(a);
        for (std::size_t k = 0; k < n; ++k) {
          for (std::size_t i = 0; i < p.size(); ++i) coord[i] = p.points[i][k];
          v[k] = ad::dot(a, coord) - q.points[j][k] * a_total;
        }
        const Var prescribed = smoothed_norm(tape, v, options.norm_smoothing) / tape.nary_sum(wsum);
        const Var actual = smoothed_norm(tape, grad_q[j], options.norm_smoothing);
        const Var gap = actual - prescribed;
        terms.push_back((gap * gap) * q.weights[j]);
      }
      out.penalty_mu = tape.nary_sum(terms) * spec.mu;
    }
  }

  if (spec.kind == DivergenceKind::WganGp) {
    if (!options.gp_plan) throw UsageError("WGAN-GP needs an interpolation plan");
    terms.clear();
    std::vector<Var> xhat(n);
    for (const auto& e : options.gp_plan->entries) {
      if (e.i >= p.size() || e.j >= q.size()) throw ShapeError("interpolation plan index out of range");
      for (std::size_t k = 0; k < n; ++k) {
        xhat[k] = p.points[e.i][k] * e.alpha + q.points[e.j][k] * (1.0 - e.alpha);
      }
      const auto ev = critic.value_and_gradient(tape, xhat);
      const Var gap = smoothed_norm(tape, ev.gradient, options.norm_smoothing) - 1.0;
      terms.push_back((gap * gap) * e.weight);
    }
    out.penalty_gp = tape.nary_sum(terms) * spec.gp_weight;
  }

  out.value = out.objective - out.penalty_lambda - out.penalty_mu - out.penalty_gp;
  return out;
}

DivergenceEstimate estimate(const DivergenceSpec& spec, const EmpiricalMeasure& p,
                            const EmpiricalMeasure& q, const Critic& critic) {
  if (p.dim() != q.dim()) throw ShapeError("estimate: dimension mismatch");
  ad::Tape tape;
  const VarMeasure vp = VarMeasure::constant(tape, p);
  const VarMeasure vq = VarMeasure::constant(tape, q);
  InterpolationPlan plan;
  BuildOptions opts;
  if (spec.kind == DivergenceKind::WganGp) {
    plan = InterpolationPlan::quadrature(p.weights(), q.weights());
    opts.gp_plan = &plan;
  }
  const auto nodes = build_divergence(tape, spec, vp, vq, critic, opts);
  DivergenceEstimate est;
  est.value = nodes.value.value();
  est.objective_part = nodes.objective.value();
  est.penalty_lambda = nodes.penalty_lambda.value();
  est.penalty_mu = nodes.penalty_mu.value();
  est.penalty_gp = nodes.penalty_gp.value();
  est.clamped = nodes.clamped;
  return est;
}

double wgan_gp_penalty(const EmpiricalMeasure& p, const EmpiricalMeasure& q, const Critic& critic,
                       std::size_t count, std::uint64_t seed) {
  if (count < 1) throw UsageError("wgan_gp_penalty: count must be >= 1");
  if (p.dim() != q.dim()) throw ShapeError("wgan_gp_penalty: dimension mismatch");
  Rng rng(seed);
  const auto plan = InterpolationPlan::monte_carlo(p, q, count, rng);
  ad::Tape tape;
  const VarMeasure vp = VarMeasure::constant(tape, p);
  const VarMeasure vq = VarMeasure::constant(tape, q);
  DivergenceSpec spec{DivergenceKind::WganGp, 0.1, 1.0, 1.0};
  BuildOptions opts;
  opts.gp_plan = &plan;
  return build_divergence(tape, spec, vp, vq, critic, opts).penalty_gp.value();
}

double fogan_penalty_G(const EmpiricalMeasure& p, const EmpiricalMeasure& q, const Critic& critic) {
  if (p.dim() != q.dim()) throw ShapeError("fogan_penalty_G: dimension mismatch");
  ad::Tape tape;
  const VarMeasure vp = VarMeasure::constant(tape, p);
  const VarMeasure vq = VarMeasure::constant(tape, q);
  DivergenceSpec spec{DivergenceKind::FirstOrderPW, 1.0, 1.0, 0.0};
  return build_divergence(tape, spec, vp, vq, critic, BuildOptions{}).penalty_mu.value();
}

double wasserstein_1d_exact(const EmpiricalMeasure& p, const EmpiricalMeasure& q) {
  if (p.dim() != 1 || q.dim() != 1) {
    throw UnsupportedDimensionError("wasserstein_1d_exact handles one-dimensional measures only");
  }
  // Signed mass events: +w for p, -w for q; integrate |F_p - F_q|.
  std::vector<std::pair<double, double>> events;
  events.reserve(p.size() + q.size());
  for (std::size_t i = 0; i < p.size(); ++i) events.emplace_back(p.point(i)[0], p.weight(i));
  for (std::size_t j = 0; j < q.size(); ++j) events.emplace_back(q.point(j)[0], -q.weight(j));
  std::sort(events.begin(), events.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double cdf_gap = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < events.size(); ++k) {
    cdf_gap += events[k].second;
    total += std::abs(cdf_gap) * (events[k + 1].first - events[k].first);
  }
  return total;
}

}  // namespace fogan
