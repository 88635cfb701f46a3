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

#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "fogan/error.hpp"
#include "fogan/training.hpp"

using namespace fogan;
using ad::Var;

namespace {

Critic scalar_critic(std::function<Var(Var)> f) {
  return Critic([f](ad::Tape&, std::span<const Var> x) { return f(x[0]); });
}

GeneratorBatch latents_only(std::vector<double> zs) {
  GeneratorBatch b;
  for (double z : zs) b.latents.push_back(Point{z});
  return b;
}

// f(x) = tanh(x0 - 0.5 x1) + 0.2 |x|^2, a smooth critic in the plane.
Critic planar_critic() {
  return Critic([](ad::Tape&, std::span<const Var> x) {
    return ad::tanh(x[0] - 0.5 * x[1]) + 0.2 * (x[0] * x[0] + x[1] * x[1]);
  });
}

}  // namespace

TEST_CASE("update magnitudes for two fixed critics") {
  const auto p = EmpiricalMeasure::dirac({0.0});
  const auto fam = GeneratorFamily::dirac({0.5});
  const auto first_order = scalar_critic([](Var x) { return x * (-4.0 * x * x + 4.0 * x - 2.0); });
  const auto dir = generator_update_fogan(first_order, fam, p, std::nullopt, 8, 1);
  REQUIRE(dir.size() == 1);
  CHECK(std::abs(std::abs(dir[0]) - 0.5) < 1e-12);
  CHECK(dir[0] < 0.0);  // a step moves theta toward the target at 0

  const auto wrong = scalar_critic([](Var x) { return -2.0 * x * x; });
  const auto dir2 = generator_update_fogan(wrong, fam, p, std::nullopt, 8, 1);
  CHECK(std::abs(std::abs(dir2[0]) - 1.0) < 1e-12);
}

TEST_CASE("constant critic gives a zero update") {
  const Critic c([](ad::Tape& t, std::span<const Var>) { return t.constant(3.0); });
  const auto p = EmpiricalMeasure::dirac({0.0, 0.0});
  const auto fam = GeneratorFamily::affine(2, LatentSpec{LatentKind::UnitCube, 2},
                                           {1.0, 0.0, 0.0, 1.0, 0.5, 0.5});
  for (double x : generator_update_fogan(c, fam, p, StretchSpec{0.1}, 16, 2)) CHECK(x == 0.0);
}

TEST_CASE("stretched fogan update pulls through the interpolation") {
  // f(x) = x on p = {0}, Q = delta_theta: x' = (1 - a) theta, so the update is
  // (1 - E[a]) / 2 over the drawn alphas.
  const auto p = EmpiricalMeasure::dirac({0.0});
  const auto fam = GeneratorFamily::dirac({2.0});
  const auto id = scalar_critic([](Var x) { return x; });
  const auto dir = generator_update_fogan(id, fam, p, StretchSpec{0.5}, 4000, 3);
  CHECK(dir[0] == doctest::Approx(0.5 * (1.0 - 0.25)).epsilon(0.02));
  CHECK(dir[0] < 0.5);
}

TEST_CASE("envelope with a linear critic under WGAN-GP") {
  // f(x) = -(theta/2 + 1) x at theta = 1 has a constant gradient norm, so the
  // pathwise penalty gradient vanishes and the update is the slope times E[z].
  const double theta = 1.0;
  const double slope = -(theta / 2 + 1);
  const auto f = scalar_critic([slope](Var x) { return slope * x; });
  const auto fam = GeneratorFamily::uniform_interval(theta);
  const auto batch = latents_only({0.1, 0.4, 0.8, 0.9});
  const auto p_batch = EmpiricalMeasure::dirac({0.0});
  const DivergenceSpec spec{DivergenceKind::WganGp, 0.1, 1.0, 1.0};
  Rng rng(1);
  const auto plan = InterpolationPlan::monte_carlo(p_batch, EmpiricalMeasure::from_scalars(std::vector<double>{0, 0, 0, 0}), 4, rng);
  const auto dir = envelope_direction(spec, f, p_batch, fam, batch, &plan);
  CHECK(dir[0] == doctest::Approx(slope * 0.55).epsilon(1e-12));
}

TEST_CASE("vanishing penalty reduces the envelope to the naive rule") {
  const auto fam = GeneratorFamily::affine(2, LatentSpec{LatentKind::SymmetricCube, 2},
                                           {1.0, 0.2, -0.3, 0.7, 1.5, -0.5});
  Rng rng(8);
  std::vector<Point> pts;
  for (int k = 0; k < 6; ++k) pts.push_back({rng.normal(), rng.normal()});
  const EmpiricalMeasure p(pts);
  const DivergenceSpec spec{DivergenceKind::WganGp, 0.1, 1.0, 0.0};
  Rng lr(3);
  Rng pr(4);
  const auto batch = draw_generator_batch(fam, 7, std::nullopt, {}, lr, pr);
  const auto plan = InterpolationPlan::monte_carlo(p, p, 7, pr);
  const auto env = envelope_direction(spec, planar_critic(), p, fam, batch, &plan);
  const auto naive = naive_direction(spec, planar_critic(), fam, batch);
  REQUIRE(env.size() == naive.size());
  for (std::size_t k = 0; k < env.size(); ++k) CHECK(env[k] == doctest::Approx(naive[k]).epsilon(1e-13));
}

TEST_CASE("envelope matches finite differences of the estimate") {
  const Point a{0.3, -0.2};
  const auto p = EmpiricalMeasure::dirac(a);
  const std::vector<double> theta{1.4, 0.9};
  for (auto kind : {DivergenceKind::PenalizedW, DivergenceKind::FirstOrderPW}) {
    const DivergenceSpec spec{kind, 0.3, 0.7, 0.0};
    const auto fam = GeneratorFamily::dirac(theta);
    const auto dir = generator_update_envelope(spec, planar_critic(), p, fam, 1, 5);
    const double h = 1e-5;
    for (std::size_t k = 0; k < 2; ++k) {
      auto tp = theta;
      auto tm = theta;
      tp[k] += h;
      tm[k] -= h;
      const double fp = estimate(spec, p, EmpiricalMeasure::dirac(tp), planar_critic()).value;
      const double fm = estimate(spec, p, EmpiricalMeasure::dirac(tm), planar_critic()).value;
      const double fd = -(fp - fm) / (2 * h);
      CHECK(std::abs(dir[k] - fd) <= 1e-4 * std::abs(fd));
    }
  }
}

TEST_CASE("classic GAN naive direction uses -log(1 - f)") {
  const auto fam = GeneratorFamily::dirac({0.4});
  const auto u = scalar_critic([](Var x) { return ad::sigmoid(2.0 * x - 0.3); });
  const auto batch = latents_only({0.0});
  const auto dir = naive_direction(DivergenceSpec{DivergenceKind::ClassicGan}, u, fam, batch);
  // d/dtheta -log(1 - s(2 theta - 0.3)) = 2 s(2 theta - 0.3)
  const double s = 1.0 / (1.0 + std::exp(-(2.0 * 0.4 - 0.3)));
  CHECK(dir[0] == doctest::Approx(2.0 * s).epsilon(1e-13));
}

TEST_CASE("variance probe") {
  const auto population = EmpiricalMeasure::dirac({0.0});
  const auto fam = GeneratorFamily::uniform_interval(1.0);
  const auto curved = scalar_critic([](Var x) { return -1.5 * x + 0.5 * x * x; });

  SUBCASE("gradient penalty adds variance") {
    const DivergenceSpec spec{DivergenceKind::WganGp, 0.1, 1.0, 1.0};
    const auto [fogan, env] = variance_probe(spec, curved, population, fam, 16, 200, 7);
    CHECK(fogan.batches_used == 200);
    CHECK(fogan.rule == UpdateRule::FoganHalfGrad);
    CHECK(env.rule == UpdateRule::EnvelopeFullGrad);
    CHECK(fogan.per_batch_variance[0] == 0.0);
    CHECK(env.per_batch_variance[0] > 0.0);
    CHECK(fogan.per_batch_variance[0] <= env.per_batch_variance[0]);
  }
  SUBCASE("no penalty, no P dependence") {
    const DivergenceSpec spec{DivergenceKind::WganGp, 0.1, 1.0, 0.0};
    const auto [fogan, env] = variance_probe(spec, curved, population, fam, 16, 40, 7);
    CHECK(fogan.per_batch_variance[0] == 0.0);
    CHECK(env.per_batch_variance[0] == 0.0);
  }
  SUBCASE("spread population, first order divergence") {
    std::vector<double> xs;
    for (int k = 0; k < 50; ++k) xs.push_back(-1.0 - 0.02 * k);
    const auto spread = EmpiricalMeasure::from_scalars(xs);
    const DivergenceSpec spec{DivergenceKind::FirstOrderPW, 0.1, 1.0, 0.0};
    const auto [fogan, env] = variance_probe(spec, curved, spread, fam, 8, 60, 9);
    CHECK(fogan.per_batch_variance[0] == 0.0);
    CHECK(env.per_batch_variance[0] > 0.0);
  }
  CHECK_THROWS_AS(variance_probe(DivergenceSpec{}, curved, population, fam, 8, 29, 1), UsageError);
}

TEST_CASE("optimizer conventions") {
  Optimizer sgd(OptimizerConfig{OptimizerKind::Sgd}, 2);
  std::vector<double> x{1.0, 2.0};
  const std::vector<double> d{0.5, -1.0};
  sgd.step(x, d, 0.1);
  CHECK(x[0] == doctest::Approx(1.05));
  CHECK(x[1] == doctest::Approx(1.9));

  Optimizer adam(OptimizerConfig{}, 2);
  std::vector<double> y{0.0, 0.0};
  adam.step(y, d, 0.01);
  // beta1 = 0: the first step is lr * g / (|g| + eps).
  CHECK(y[0] == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(y[1] == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK_THROWS_AS(adam.step(y, std::vector<double>{1.0}, 0.1), ShapeError);
  CHECK_THROWS_AS(Optimizer(OptimizerConfig{OptimizerKind::Adam, 1.0, 0.9, 1e-8}, 1), ConfigError);
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.batch_size = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.critic_lr = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.critic_iters = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.stretch = StretchSpec{0.0};
  CHECK_THROWS_AS(c.validate(), DomainError);
  CHECK(parse_update_rule("fogan_half_grad") == UpdateRule::FoganHalfGrad);
  CHECK(to_string(UpdateRule::WganNaive) == "wgan_naive");
  CHECK_THROWS_AS(parse_update_rule("sideways"), ConfigError);
}

TEST_CASE("critic steps do not decrease their own batch estimate") {
  Rng data(3);
  std::vector<Point> pp;
  std::vector<Point> qq;
  for (int k = 0; k < 8; ++k) pp.push_back({data.normal(), data.normal()});
  for (int k = 0; k < 8; ++k) qq.push_back({2.0 + data.normal(), data.normal()});
  const EmpiricalMeasure p(pp);
  const EmpiricalMeasure q(qq);
  for (auto kind : {DivergenceKind::PenalizedW, DivergenceKind::FirstOrderPW, DivergenceKind::WganGp,
                    DivergenceKind::ClassicGan}) {
    TrainConfig cfg;
    cfg.divergence.kind = kind;
    cfg.critic_lr = 1e-4;
    cfg.optimizer.kind = OptimizerKind::Sgd;
    Mlp critic = Mlp::init({2, 8, 8, 1}, Activation::SmoothRelu, InitScheme::UniformScaled, 11);
    Optimizer opt(cfg.optimizer, critic.param_count());
    ad::Tape tape;
    for (int step = 0; step < 20; ++step) {
      Rng rng(100 + step);
      Rng replay = rng;
      const auto before = critic_step(cfg, critic, opt, p, q, rng, tape);
      // Re-evaluate the updated critic on the same batch and plan.
      Mlp frozen = critic;
      Optimizer scratch(OptimizerConfig{OptimizerKind::Sgd}, critic.param_count());
      TrainConfig tiny = cfg;
      tiny.critic_lr = 1e-300;
      const auto after = critic_step(tiny, frozen, scratch, p, q, replay, tape);
      CHECK(after.value >= before.value);
    }
  }
}

TEST_CASE("training contracts a Dirac generator") {
  TrainConfig cfg;
  cfg.total_iters = 400;
  cfg.batch_size = 4;
  cfg.critic_iters = 5;
  cfg.critic_lr = 1e-2;
  cfg.generator_lr = 1e-2;
  cfg.seed = 17;
  cfg.stretch.reset();
  auto gen = GeneratorFamily::dirac({1.0});
  Mlp critic = Mlp::init({1, 16, 16, 1}, Activation::SmoothRelu, InitScheme::UniformScaled, 5);
  std::vector<double> path;
  TrainCallbacks cb;
  cb.on_step = [&](int, const GeneratorFamily& g, const Mlp&, TraceRow& row) {
    path.push_back(g.theta()[0]);
    row.metrics.emplace_back("theta", g.theta()[0]);
  };
  const auto trace = train(cfg, EmpiricalMeasure::dirac({0.0}), gen, critic, cb);
  REQUIRE_FALSE(trace.aborted);
  REQUIRE(trace.rows.size() == 400);
  CHECK(trace.rows.back().metrics.size() == 1);
  // After a short warmup |theta| shrinks monotonically until it reaches the
  // step-size scale.
  const int warmup = 20;
  int violations = 0;
  for (std::size_t k = warmup + 1; k < path.size(); ++k) {
    if (std::abs(path[k - 1]) < 0.05) break;
    if (std::abs(path[k]) > std::abs(path[k - 1])) ++violations;
  }
  CHECK(violations == 0);
  CHECK(std::abs(gen.theta()[0]) < 0.1);
}

TEST_CASE("training is deterministic per seed") {
  auto run = [](std::uint64_t seed) {
    TrainConfig cfg;
    cfg.total_iters = 30;
    cfg.batch_size = 8;
    cfg.critic_iters = 2;
    cfg.critic_lr = 1e-3;
    cfg.generator_lr = 1e-3;
    cfg.seed = seed;
    auto net = Mlp::init({2, 8, 2}, Activation::Tanh, InitScheme::UniformScaled, 1);
    auto gen = GeneratorFamily::network(net, LatentSpec{LatentKind::SymmetricCube, 2});
    Mlp critic = Mlp::init({2, 8, 1}, Activation::SmoothRelu, InitScheme::UniformScaled, 2);
    TargetSampler ring = [](Rng& r) {
      const double a = 6.283185307179586 * r.uniform();
      return Point{2 * std::cos(a), 2 * std::sin(a)};
    };
    const auto trace = train(cfg, ring, gen, critic);
    std::vector<double> out;
    for (const auto& row : trace.rows) {
      out.push_back(row.critic_estimate.value);
      out.push_back(row.grad_norm);
    }
    out.insert(out.end(), gen.theta().begin(), gen.theta().end());
    return out;
  };
  const auto a = run(4);
  const auto b = run(4);
  const auto c = run(5);
  REQUIRE(a.size() == b.size());
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  CHECK(a != c);
}

TEST_CASE("non-finite parameters abort with the trace kept") {
  TrainConfig cfg;
  cfg.total_iters = 50;
  cfg.batch_size = 4;
  cfg.critic_iters = 1;
  cfg.optimizer.kind = OptimizerKind::Sgd;
  cfg.generator_lr = 1e308;
  cfg.critic_lr = 1e-3;
  auto gen = GeneratorFamily::dirac({1.0});
  Mlp critic = Mlp::init({1, 4, 1}, Activation::Tanh, InitScheme::UniformScaled, 5);
  const auto trace = train(cfg, EmpiricalMeasure::dirac({0.0}), gen, critic);
  CHECK(trace.aborted);
  CHECK_FALSE(trace.abort_reason.empty());
  CHECK(trace.rows.size() < 50);
}
