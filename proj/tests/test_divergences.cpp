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
#include <vector>

#include "doctest.h"
#include "fogan/critic_solver.hpp"
#include "fogan/divergences.hpp"
#include "fogan/error.hpp"

using namespace fogan;
using ad::Var;

namespace {

// f(x) = tanh(a.x) + 0.3 (b.x)^2 + c, with a hand-written gradient for the
// double-loop oracle.
struct SmoothCritic {
  std::vector<double> a;
  std::vector<double> b;
  double c = 0.0;

  double value(const Point& x) const {
    double ax = 0.0;
    double bx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      ax += a[k] * x[k];
      bx += b[k] * x[k];
    }
    return std::tanh(ax) + 0.3 * bx * bx + c;
  }
  Point gradient(const Point& x) const {
    double ax = 0.0;
    double bx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      ax += a[k] * x[k];
      bx += b[k] * x[k];
    }
    const double t = std::tanh(ax);
    Point g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) g[k] = (1.0 - t * t) * a[k] + 0.6 * bx * b[k];
    return g;
  }
  Critic critic() const {
    const SmoothCritic self = *this;
    return Critic([self](ad::Tape& t, std::span<const Var> x) {
      Var ax = t.constant(0.0);
      Var bx = t.constant(0.0);
      for (std::size_t k = 0; k < x.size(); ++k) {
        ax = ax + x[k] * self.a[k];
        bx = bx + x[k] * self.b[k];
      }
      return ad::tanh(ax) + 0.3 * bx * bx + self.c;
    });
  }
};

double dist(const Point& x, const Point& y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
  return std::sqrt(s);
}

struct OracleParts {
  double objective = 0.0;
  double lambda_term = 0.0;
  double mu_term = 0.0;
};

// Plain loops over the definition of the first order penalized divergence.
OracleParts oracle_first_order(const EmpiricalMeasure& p, const EmpiricalMeasure& q,
                               const SmoothCritic& f) {
  OracleParts out;
  for (std::size_t i = 0; i < p.size(); ++i) out.objective += p.weight(i) * f.value(p.point(i));
  for (std::size_t j = 0; j < q.size(); ++j) out.objective -= q.weight(j) * f.value(q.point(j));
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double df = f.value(p.point(i)) - f.value(q.point(j));
      out.lambda_term += p.weight(i) * q.weight(j) * df * df / dist(p.point(i), q.point(j));
    }
  }
  const std::size_t n = static_cast<std::size_t>(p.dim());
  for (std::size_t j = 0; j < q.size(); ++j) {
    const Point& y = q.point(j);
    Point v(n, 0.0);
    double w = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Point& x = p.point(i);
      const double d = dist(x, y);
      const double df = f.value(x) - f.value(y);
      for (std::size_t k = 0; k < n; ++k) v[k] += p.weight(i) * (x[k] - y[k]) * df / (d * d * d);
      w += p.weight(i) / d;
    }
    double vn = 0.0;
    for (double c : v) vn += c * c;
    const Point g = f.gradient(y);
    double gn = 0.0;
    for (double c : g) gn += c * c;
    const double gap = std::sqrt(gn) - std::sqrt(vn) / w;
    out.mu_term += q.weight(j) * gap * gap;
  }
  return out;
}

EmpiricalMeasure random_measure(Rng& rng, int count, int dim, double shift, bool weighted) {
  std::vector<Point> pts;
  for (int i = 0; i < count; ++i) {
    Point x(static_cast<std::size_t>(dim));
    for (auto& c : x) c = rng.normal();
    x[0] += shift;
    pts.push_back(std::move(x));
  }
  if (!weighted) return EmpiricalMeasure(std::move(pts));
  std::vector<double> w(pts.size());
  double total = 0.0;
  for (auto& c : w) {
    c = 0.2 + rng.uniform();
    total += c;
  }
  for (auto& c : w) c /= total;
  return EmpiricalMeasure(std::move(pts), std::move(w));
}

SmoothCritic random_smooth_critic(Rng& rng, int dim) {
  SmoothCritic f;
  for (int k = 0; k < dim; ++k) {
    f.a.push_back(rng.normal());
    f.b.push_back(rng.normal());
  }
  f.c = rng.normal();
  return f;
}

Critic linear_critic(std::vector<double> w, double b) {
  return Critic([w, b](ad::Tape& t, std::span<const Var> x) {
    Var acc = t.constant(b);
    for (std::size_t k = 0; k < x.size(); ++k) acc = acc + x[k] * w[k];
    return acc;
  });
}

}  // namespace

TEST_CASE("penalized Wasserstein on a Dirac pair") {
  const DivergenceSpec spec{DivergenceKind::PenalizedW, 1.0, 1.0, 0.0};
  const auto p = EmpiricalMeasure::dirac({0.0});
  const auto q = EmpiricalMeasure::dirac({1.0});
  const auto est = estimate(spec, p, q, linear_critic({-0.5}, 0.5));
  CHECK(est.value == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(est.objective_part == doctest::Approx(0.5));
  CHECK(est.penalty_lambda == doctest::Approx(0.25));
}

TEST_CASE("zero critic gives zero on equal supports") {
  Rng rng(1);
  const auto p = random_measure(rng, 5, 2, 0.0, false);
  const Critic zero([](ad::Tape& t, std::span<const Var>) { return t.constant(0.0); });
  for (auto kind : {DivergenceKind::PenalizedW, DivergenceKind::FirstOrderPW}) {
    const DivergenceSpec spec{kind, 0.3, 1.0, 10.0};
    const auto est = estimate(spec, p, p, zero);
    CHECK(est.value == 0.0);
    CHECK(est.clamped);  // identical points hit the distance floor
  }
}

TEST_CASE("first order divergence matches a double-loop recomputation") {
  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 1 + trial % 3;
    const auto p = random_measure(rng, 3, dim, 0.0, trial % 2 == 1);
    const auto q = random_measure(rng, 3, dim, 4.0, trial % 2 == 0);
    const auto f = random_smooth_critic(rng, dim);
    const DivergenceSpec spec{DivergenceKind::FirstOrderPW, 1.0, 1.0, 0.0};
    const auto est = estimate(spec, p, q, f.critic());
    const auto ref = oracle_first_order(p, q, f);
    CHECK(std::abs(est.objective_part - ref.objective) < 1e-10);
    CHECK(std::abs(est.penalty_lambda - ref.lambda_term) < 1e-10);
    CHECK(std::abs(est.penalty_mu - ref.mu_term) < 1e-10);
    CHECK(std::abs(est.value - (ref.objective - ref.lambda_term - ref.mu_term)) < 1e-10);
    CHECK_FALSE(est.clamped);

    // lambda and mu scale their own terms only.
    const DivergenceSpec scaled{DivergenceKind::FirstOrderPW, 0.1, 2.5, 0.0};
    const auto est2 = estimate(scaled, p, q, f.critic());
    CHECK(std::abs(est2.penalty_lambda - 0.1 * ref.lambda_term) < 1e-10);
    CHECK(std::abs(est2.penalty_mu - 2.5 * ref.mu_term) < 1e-10);
  }
}

TEST_CASE("decomposition identity") {
  Rng rng(5);
  const auto p = random_measure(rng, 4, 2, 0.0, true);
  const auto q = random_measure(rng, 3, 2, 3.0, false);
  const auto f = random_smooth_critic(rng, 2);
  for (auto kind : {DivergenceKind::WganGp, DivergenceKind::PenalizedW, DivergenceKind::FirstOrderPW}) {
    const auto est = estimate(DivergenceSpec{kind, 0.1, 1.0, 10.0}, p, q, f.critic());
    CHECK(std::abs(est.value - (est.objective_part - est.penalty_part())) < 1e-12);
  }
}

TEST_CASE("shift invariance in the critic") {
  Rng rng(6);
  const auto p = random_measure(rng, 4, 3, 0.0, false);
  const auto q = random_measure(rng, 5, 3, 2.0, true);
  auto f = random_smooth_critic(rng, 3);
  auto g = f;
  g.c += 3.7;
  for (auto kind : {DivergenceKind::WganGp, DivergenceKind::PenalizedW, DivergenceKind::FirstOrderPW}) {
    const DivergenceSpec spec{kind, 0.1, 1.0, 10.0};
    const auto a = estimate(spec, p, q, f.critic());
    const auto b = estimate(spec, p, q, g.critic());
    CHECK(std::abs(a.value - b.value) < 1e-12);
  }
}

TEST_CASE("penalized objective is concave in tabular critics") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_measure(rng, 4, 2, 0.0, trial % 2 == 0);
    const auto q = random_measure(rng, 5, 2, 2.5, false);
    std::vector<double> u(9);
    std::vector<double> v(9);
    for (auto& c : u) c = rng.normal();
    for (auto& c : v) c = rng.normal();
    const double t = rng.uniform();
    std::vector<double> mix(9);
    for (std::size_t k = 0; k < 9; ++k) mix[k] = t * u[k] + (1 - t) * v[k];
    const double lam = 0.1 + rng.uniform();
    const auto tu = TabularCritic::from_values(p, q, u, lam);
    const auto tv = TabularCritic::from_values(p, q, v, lam);
    const auto tm = TabularCritic::from_values(p, q, mix, lam);
    const double lhs = tau_p_value(tm, p, q, lam);
    const double rhs = t * tau_p_value(tu, p, q, lam) + (1 - t) * tau_p_value(tv, p, q, lam);
    CHECK(lhs >= rhs - 1e-12);
  }
}

TEST_CASE("tabular objective agrees with the generic estimate") {
  Rng rng(13);
  const auto p = random_measure(rng, 3, 2, 0.0, false);
  const auto q = random_measure(rng, 4, 2, 3.0, false);
  std::vector<double> vals(7);
  for (auto& c : vals) c = rng.normal();
  const auto tab = TabularCritic::from_values(p, q, vals, 0.4);
  const auto ext = extend_critic_c1(tab, p, q);
  const auto est = estimate(DivergenceSpec{DivergenceKind::PenalizedW, 0.4, 1.0, 0.0}, p, q,
                            ext.as_critic());
  CHECK(std::abs(est.value - tau_p_value(tab, p, q, 0.4)) < 1e-12);
}

TEST_CASE("solved divergence grows with the Dirac separation") {
  double last = -1.0;
  for (double gap : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const auto p = EmpiricalMeasure::dirac({0.0});
    const auto q = EmpiricalMeasure::dirac({gap});
    const auto [critic, report] = solve_optimal_critic(p, q, 0.7);
    const double tau = tau_p_value(critic, p, q, 0.7);
    CHECK(tau > last);
    CHECK(wasserstein_1d_exact(p, q) == doctest::Approx(gap));
    last = tau;
  }
}

TEST_CASE("classic GAN divergence") {
  const auto p = EmpiricalMeasure::from_scalars(std::vector<double>{0.0, 1.0});
  const auto q = EmpiricalMeasure::from_scalars(std::vector<double>{2.0});
  // u(x) = sigmoid(1 - x)
  const Critic u([](ad::Tape&, std::span<const Var> x) { return ad::sigmoid(1.0 - x[0]); });
  const auto s = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  const double ref = 0.5 * (std::log(s(1.0)) + std::log(s(0.0))) + std::log(1.0 - s(-1.0));
  const auto est = estimate(DivergenceSpec{DivergenceKind::ClassicGan}, p, q, u);
  CHECK(est.value == doctest::Approx(ref).epsilon(1e-14));
  CHECK(est.penalty_part() == 0.0);

  const Critic bad([](ad::Tape& t, std::span<const Var>) { return t.constant(1.5); });
  CHECK_THROWS_AS(estimate(DivergenceSpec{DivergenceKind::ClassicGan}, p, q, bad), DomainError);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS((DivergenceSpec{DivergenceKind::PenalizedW, 0.0, 1.0, 1.0}.validate()), DomainError);
  CHECK_THROWS_AS((DivergenceSpec{DivergenceKind::FirstOrderPW, 0.1, 0.0, 1.0}.validate()), DomainError);
  CHECK_THROWS_AS((DivergenceSpec{DivergenceKind::WganGp, 0.1, 1.0, -1.0}.validate()), DomainError);
  CHECK_NOTHROW((DivergenceSpec{DivergenceKind::ClassicGan, -1.0, -1.0, 1.0}.validate()));
  CHECK(parse_divergence_kind("fogan") == DivergenceKind::FirstOrderPW);
  CHECK(parse_divergence_kind("wgan_gp") == DivergenceKind::WganGp);
  CHECK_THROWS(parse_divergence_kind("mmd"));
}

TEST_CASE("gradient penalty Monte Carlo") {
  const auto p = EmpiricalMeasure::from_scalars(std::vector<double>{0.0, 0.3});
  const auto q = EmpiricalMeasure::from_scalars(std::vector<double>{1.0, 2.0});
  CHECK(wgan_gp_penalty(p, q, linear_critic({1.0}, 0.0), 50, 1) == doctest::Approx(0.0));
  const Critic zero([](ad::Tape& t, std::span<const Var>) { return t.constant(0.0); });
  CHECK(wgan_gp_penalty(p, q, zero, 50, 1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(wgan_gp_penalty(p, q, zero, 0, 1), UsageError);

  // Slope -(theta/2 + 1) at theta = 2 deviates from 1 by theta/2.
  const double theta = 2.0;
  const auto uq = sample(GeneratorFamily::uniform_interval(theta), 200, 4);
  const auto crit = linear_critic({-(theta / 2 + 1)}, 0.0);
  CHECK(wgan_gp_penalty(EmpiricalMeasure::dirac({0.0}), uq, crit, 100, 9) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("quadrature gradient penalty in estimate") {
  // Quadratic critic f = x^2 on p = {0}, q = {1}: (|2 (1-a)| - 1)^2 integrated
  // over a in [0,1] is 1/3.
  const Critic sq([](ad::Tape&, std::span<const Var> x) { return x[0] * x[0]; });
  const auto est = estimate(DivergenceSpec{DivergenceKind::WganGp, 0.1, 1.0, 1.0},
                            EmpiricalMeasure::dirac({0.0}), EmpiricalMeasure::dirac({1.0}), sq);
  // The integrand has a kink at a = 1/2, so the rule is accurate but not exact.
  CHECK(est.penalty_gp == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
}

TEST_CASE("Gauss-Legendre rule integrates polynomials") {
  std::vector<double> x;
  std::vector<double> w;
  gauss_legendre_unit(16, x, w);
  for (int deg = 0; deg <= 31; ++deg) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * std::pow(x[k], deg);
    CHECK(s == doctest::Approx(1.0 / (deg + 1)).epsilon(1e-13));
  }
}

TEST_CASE("first order penalty G") {
  Rng rng(21);
  const auto p = random_measure(rng, 4, 2, 0.0, false);
  const auto q = random_measure(rng, 3, 2, 3.0, false);
  const Critic zero([](ad::Tape& t, std::span<const Var>) { return t.constant(0.0); });
  CHECK(fogan_penalty_G(p, q, zero) == 0.0);

  const auto [tab, report] = solve_optimal_critic(p, q, 0.5);
  REQUIRE(report.converged);
  const auto ext = extend_critic_c1(tab, p, q);
  CHECK(fogan_penalty_G(p, q, ext.as_critic()) < 1e-10);

  // Adding 0.1 x[0] breaks the gradient identity. Recompute G by hand.
  const Critic base = ext.as_critic();
  const Critic tilted([base](ad::Tape& t, std::span<const Var> x) {
    return base.value(t, x) + 0.1 * x[0];
  });
  const double g = fogan_penalty_G(p, q, tilted);
  CHECK(g > 0.0);
  double ref = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const Point& y = q.point(j);
    auto fy = [&](const Point& z) { return ext.value(z) + 0.1 * z[0]; };
    Point v(2, 0.0);
    double w = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Point& x = p.point(i);
      const double d = dist(x, y);
      const double df = fy(x) - fy(y);
      for (int k = 0; k < 2; ++k) v[k] += p.weight(i) * (x[k] - y[k]) * df / (d * d * d);
      w += p.weight(i) / d;
    }
    auto grad = ext.gradient(y);
    grad[0] += 0.1;
    const double gap = std::hypot(grad[0], grad[1]) - std::hypot(v[0], v[1]) / w;
    ref += q.weight(j) * gap * gap;
  }
  CHECK(g == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("exact one-dimensional Wasserstein distance") {
  const auto zero = EmpiricalMeasure::dirac({0.0});
  CHECK(wasserstein_1d_exact(zero, EmpiricalMeasure::dirac({0.2})) == doctest::Approx(0.2));
  const auto two = EmpiricalMeasure::from_scalars(std::vector<double>{0.0, 1.0});
  CHECK(wasserstein_1d_exact(two, two) == 0.0);
  CHECK(wasserstein_1d_exact(two, EmpiricalMeasure::dirac({0.5})) == doctest::Approx(0.5));
  CHECK_THROWS_AS(wasserstein_1d_exact(EmpiricalMeasure::dirac({0.0, 1.0}),
                                       EmpiricalMeasure::dirac({1.0, 0.0})),
                  UnsupportedDimensionError);

  // Equal-size samples: sorted matching is optimal.
  Rng rng(3);
  std::vector<double> a(40);
  std::vector<double> b(40);
  for (auto& c : a) c = rng.normal();
  for (auto& c : b) c = 1.0 + 2.0 * rng.uniform();
  const double w = wasserstein_1d_exact(EmpiricalMeasure::from_scalars(a), EmpiricalMeasure::from_scalars(b));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double ref = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) ref += std::abs(a[k] - b[k]) / 40.0;
  CHECK(w == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("frozen network critic matches the variable-bound critic") {
  const auto net = Mlp::init({2, 6, 1}, Activation::SmoothRelu, InitScheme::UniformScaled, 4);
  Rng rng(2);
  const auto p = random_measure(rng, 3, 2, 0.0, false);
  const auto q = random_measure(rng, 3, 2, 2.0, false);
  const DivergenceSpec spec{DivergenceKind::FirstOrderPW, 0.1, 1.0, 0.0};
  const auto a = estimate(spec, p, q, frozen_mlp_critic(net));
  ad::Tape t;
  const auto params = net.bind_variables(t);
  const auto crit = mlp_critic(net, params);
  const auto b = build_divergence(t, spec, VarMeasure::constant(t, p), VarMeasure::constant(t, q),
                                  crit, BuildOptions{});
  CHECK(a.value == doctest::Approx(b.value.value()).epsilon(1e-13));
}
