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
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "fogan/checks/checks.hpp"
#include "fogan/critic_solver.hpp"
#include "fogan/error.hpp"
#include "fogan/eval/plot.hpp"
#include "fogan/training.hpp"

namespace fogan::checks {

namespace {

using Clock = std::chrono::steady_clock;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Runs body, which fills passed/detail, and stamps the runtime.
CheckResult timed(int id, std::string name, double budget, const std::function<void(CheckResult&)>& body) {
  CheckResult r;
  r.id = id;
  r.name = std::move(name);
  r.budget_seconds = budget;
  const auto t0 = Clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (r.seconds >= budget) {
    r.passed = false;
    r.detail += " [over time budget]";
  }
  return r;
}

EmpiricalMeasure gaussian_cloud(Rng& rng, std::size_t count, int dim, const Point& shift) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i < count; ++i) {
    Point x(static_cast<std::size_t>(dim));
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = rng.normal() + shift[k];
    pts.push_back(std::move(x));
  }
  return EmpiricalMeasure(std::move(pts));
}

struct Instance {
  EmpiricalMeasure p;
  EmpiricalMeasure q;
  double lambda;
};

// Fifty random instances: up to 32 points a side, dimension up to 4.
std::vector<Instance> random_instances() {
  Rng rng(20190423);
  std::vector<Instance> out;
  for (int k = 0; k < 50; ++k) {
    const int dim = 1 + static_cast<int>(rng.index(4));
    const std::size_t n = 1 + rng.index(32);
    const std::size_t m = 1 + rng.index(32);
    Point shift(static_cast<std::size_t>(dim));
    for (auto& s : shift) s = 1.5 * rng.normal();
    Instance inst{gaussian_cloud(rng, n, dim, Point(static_cast<std::size_t>(dim), 0.0)),
                  gaussian_cloud(rng, m, dim, shift), 0.05 + 2.0 * rng.uniform()};
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<std::pair<TabularCritic, FixedPointReport>>& solved_instances() {
  static std::vector<std::pair<TabularCritic, FixedPointReport>> cache;
  if (cache.empty()) {
    for (const auto& inst : random_instances()) cache.push_back(solve_optimal_critic(inst.p, inst.q, inst.lambda));
  }
  return cache;
}

Critic scalar(std::function<ad::Var(ad::Var)> f) {
  return Critic([f = std::move(f)](ad::Tape&, std::span<const ad::Var> x) { return f(x[0]); });
}

}  // namespace

CheckResult check_dirac_closed_form() {
  return timed(1, "Dirac-pair closed form", 1.0, [](CheckResult& r) {
    Rng rng(11);
    double worst = 0.0;
    int count = 0;
    for (int dim : {1, 3}) {
      for (int k = 0; k < 20; ++k) {
        Point a(static_cast<std::size_t>(dim));
        Point b(static_cast<std::size_t>(dim));
        for (auto& v : a) v = 3.0 * rng.normal();
        for (auto& v : b) v = 3.0 * rng.normal();
        const auto p = EmpiricalMeasure::dirac(a);
        const auto q = EmpiricalMeasure::dirac(b);
        const auto [f, rep] = solve_optimal_critic(p, q, 1.0);
        const double tau = tau_p_value(f, p, q, 1.0);
        worst = std::max(worst, std::abs(tau - euclidean(a, b) / 4.0));
        ++count;
      }
    }
    r.passed = worst <= 1e-8;
    r.detail = std::to_string(count) + " pairs, max |tau - |a-b|/4| = " + num(worst);
  });
}

CheckResult check_fixed_critic_geometry() {
  return timed(2, "update magnitudes for two fixed critics", 1.0, [](CheckResult& r) {
    const auto p = EmpiricalMeasure::dirac({0.0});
    const auto fam = GeneratorFamily::dirac({0.5});
    const auto good = scalar([](ad::Var x) { return x * (-4.0 * x * x + 4.0 * x - 2.0); });
    const auto bad = scalar([](ad::Var x) { return -2.0 * x * x; });
    const double m1 = std::abs(generator_update_fogan(good, fam, p, std::nullopt, 1, 1)[0]);
    const double m2 = std::abs(generator_update_fogan(bad, fam, p, std::nullopt, 1, 1)[0]);
    r.passed = std::abs(m1 - 0.5) <= 1e-6 && std::abs(m2 - 1.0) <= 1e-6;
    r.detail = "first order critic " + num(m1) + " (want 0.5), -2x^2 critic " + num(m2) + " (want 1)";
  });
}

CheckResult check_wgan_gp_counterexample() {
  return timed(3, "WGAN-GP counterexample", 5.0, [](CheckResult& r) {
    double worst = 0.0;
    double gmin = INFINITY;
    double gmax = -INFINITY;
    std::ostringstream gammas;
    for (double th : {0.5, 1.0, 2.0}) {
      const auto d = wgan_gp_counterexample(th);
      const double want_obj = -(th / 2.0 + 1.0) * th;
      const double want_pen = th / 2.0;
      worst = std::max({worst, std::abs(d.d_objective - want_obj) / std::abs(want_obj),
                        std::abs(d.d_penalty - want_pen) / std::abs(want_pen)});
      gmin = std::min(gmin, std::abs(d.gamma()));
      gmax = std::max(gmax, std::abs(d.gamma()));
      gammas << (gammas.tellp() > 0 ? ", " : "") << num(d.gamma());
    }
    const double spread = (gmax - gmin) / gmin;
    r.passed = worst <= 1e-4 && spread > 0.10;
    r.detail = "max rel err " + num(worst) + ", gamma(theta) = " + gammas.str() + ", spread " + num(100 * spread) + "%";
  });
}

CheckResult check_fixed_point_optimality() {
  return timed(4, "fixed-point optimality", 30.0, [](CheckResult& r) {
    const auto instances = random_instances();
    auto& solved = solved_instances();
    double worst_res = 0.0;
    double worst_tau = 0.0;
    int unconverged = 0;
    for (std::size_t k = 0; k < instances.size(); ++k) {
      const auto& [f, rep] = solved[k];
      const auto& in = instances[k];
      unconverged += rep.converged ? 0 : 1;
      const auto [rp, rq] = slope_residuals(f, in.p, in.q, in.lambda);
      worst_res = std::max({worst_res, rp, rq});
      worst_tau = std::max(worst_tau, std::abs(tau_p_value(f, in.p, in.q, in.lambda) -
                                               brute_force_tau_p(in.p, in.q, in.lambda)));
    }
    r.passed = worst_res <= 1e-10 && worst_tau <= 1e-8 && unconverged == 0;
    r.detail = std::to_string(instances.size()) + " instances, max slope residual " + num(worst_res) +
               ", max |tau - brute force| " + num(worst_tau) + ", unconverged " + std::to_string(unconverged);
  });
}

CheckResult check_penalty_nulling() {
  return timed(5, "first order penalty vanishes", 10.0, [](CheckResult& r) {
    const auto instances = random_instances();
    auto& solved = solved_instances();
    double worst = 0.0;
    for (std::size_t k = 0; k < instances.size(); ++k) {
      const auto& in = instances[k];
      const auto ext = extend_critic_c1(solved[k].first, in.p, in.q);
      worst = std::max(worst, fogan_penalty_G(in.p, in.q, ext.as_critic()));
    }
    r.passed = worst < 1e-10;
    r.detail = std::to_string(instances.size()) + " instances, max G = " + num(worst);
  });
}

CheckResult check_nested_gradients() {
  return timed(6, "nested-gradient correctness", 60.0, [](CheckResult& r) {
    Rng rng(606);
    double worst = 0.0;
    const Activation acts[] = {Activation::Tanh, Activation::SmoothRelu};
    for (int k = 0; k < 10; ++k) {
      const int dim = 1 + static_cast<int>(rng.index(3));
      std::vector<int> sizes{dim};
      const int depth = 1 + static_cast<int>(rng.index(2));
      for (int l = 0; l < depth; ++l) sizes.push_back(3 + static_cast<int>(rng.index(4)));
      sizes.push_back(1);
      const Mlp net = Mlp::init(sizes, acts[k % 2], InitScheme::UniformScaled, derive_seed(606, k));
      Point shift(static_cast<std::size_t>(dim), 1.0);
      const auto p = gaussian_cloud(rng, 3 + rng.index(3), dim, Point(static_cast<std::size_t>(dim), 0.0));
      const auto q = gaussian_cloud(rng, 3 + rng.index(3), dim, shift);
      const DivergenceSpec spec{DivergenceKind::FirstOrderPW, 0.1 + rng.uniform(), 0.5 + 1.5 * rng.uniform(), 0.0};
      worst = std::max(worst, critic_loss_gradient_error(net, spec, p, q));
    }
    r.passed = worst < 1e-4;
    r.detail = "10 nets, max rel err " + num(worst) + " (h = 1e-5)";
  });
}

CheckResult check_variance() {
  return timed(7, "variance of the update rules", 60.0, [](CheckResult& r) {
    const auto population = EmpiricalMeasure::dirac({0.0});
    const auto fam = GeneratorFamily::uniform_interval(1.0);
    // Near the optimal critic of the toy, bent so that the gradient norm varies.
    const auto critic = scalar([](ad::Var x) { return -1.5 * x + 0.4 * ad::tanh(2.0 * x); });
    const DivergenceSpec spec{DivergenceKind::WganGp, 0.1, 1.0, 1.0};
    const auto [fogan, env] = variance_probe(spec, critic, population, fam, 64, 1000, 77);
    bool ok = fogan.batches_used == 1000 && env.batches_used == 1000;
    for (std::size_t k = 0; k < fogan.per_batch_variance.size(); ++k) {
      ok = ok && fogan.per_batch_variance[k] == 0.0 && env.per_batch_variance[k] > 0.0 &&
           fogan.per_batch_variance[k] <= env.per_batch_variance[k];
    }
    r.passed = ok;
    r.detail = "1000 batches, var(fogan) = " + num(fogan.per_batch_variance[0]) +
               ", var(envelope) = " + num(env.per_batch_variance[0]);
  });
}

eval::ExperimentConfig ring_config(std::uint64_t seed) {
  eval::ExperimentConfig c;
  c.task = eval::Task::Ring2d;
  c.critic_hidden = {32, 32};
  c.generator_hidden = {32, 32};
  c.latent_dim = 2;
  c.eval_every = 500;
  c.eval_samples = 2000;
  c.train.total_iters = 20000;
  c.train.batch_size = 32;
  c.train.critic_iters = 3;
  c.train.critic_lr = 1e-3;
  c.train.generator_lr = 1e-3;
  c.train.lr_drop_iter = 12000;
  c.train.divergence = DivergenceSpec{DivergenceKind::FirstOrderPW, 0.1, 1.0, 0.0};
  c.train.rule = UpdateRule::FoganHalfGrad;
  c.train.seed = seed;
  c.output_dir = "ring2d_seed" + std::to_string(seed);
  return c;
}

CheckResult check_mode_recovery() {
  return timed(8, "mode recovery on the 8-Gaussian ring", 600.0, [](CheckResult& r) {
    std::vector<std::vector<double>> curves;
    std::vector<double> iters;
    std::ostringstream best;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto res = eval::run_experiment(ring_config(seed), false);
      if (res.exit_code != 0) throw NumericError("seed " + std::to_string(seed) + ": " + res.message);
      curves.push_back(res.metric("mode_coverage"));
      iters = res.eval_iters();
      best << (seed > 1 ? ", " : "") << *std::max_element(curves.back().begin(), curves.back().end());
    }
    double peak = 0.0;
    double peak_iter = 0.0;
    for (std::size_t k = 0; k < iters.size(); ++k) {
      double mean = 0.0;
      for (const auto& c : curves) mean += c[k] / static_cast<double>(curves.size());
      if (mean > peak) {
        peak = mean;
        peak_iter = iters[k];
      }
    }
    r.passed = peak >= 7.0;
    r.detail = "seed-averaged coverage peaks at " + num(peak) + " (iteration " + num(peak_iter) +
               "), per-seed best " + best.str();
  });
}

eval::ExperimentConfig toy_text_config(UpdateRule rule, DivergenceKind kind) {
  eval::ExperimentConfig c;
  c.task = eval::Task::ToyText;
  c.critic_hidden = {32};
  c.generator_hidden = {64};
  c.latent_dim = 16;
  c.eval_every = 250;
  c.eval_samples = 200;
  c.corpus_size = 20000;
  c.bayes_repeats = 20;
  c.smooth = 3;
  c.train.total_iters = 10000;
  c.train.batch_size = 32;
  c.train.critic_iters = 2;
  c.train.critic_lr = 1e-3;
  c.train.generator_lr = 3e-3;
  c.train.rule = rule;
  c.train.seed = 1;
  if (kind == DivergenceKind::WganGp) {
    c.train.divergence = DivergenceSpec{DivergenceKind::WganGp, 0.1, 1.0, 10.0};
    c.train.stretch.reset();
  } else {
    c.train.divergence = DivergenceSpec{DivergenceKind::FirstOrderPW, 0.1, 1.0, 0.0};
  }
  c.output_dir = std::string("toytext_") + (kind == DivergenceKind::WganGp ? "wgan_gp" : "fogan");
  return c;
}

CheckResult check_toy_text(const std::string& report_dir) {
  return timed(9, "toy-text JSD against the Bayes limit", 900.0, [&](CheckResult& r) {
    const auto fogan_cfg = toy_text_config(UpdateRule::FoganHalfGrad, DivergenceKind::FirstOrderPW);
    const auto wgan_cfg = toy_text_config(UpdateRule::WganNaive, DivergenceKind::WganGp);
    auto run = [&](eval::ExperimentConfig c) {
      if (!report_dir.empty()) c.output_dir = (std::filesystem::path(report_dir) / c.output_dir).string();
      auto res = eval::run_experiment(c, !report_dir.empty());
      if (res.exit_code != 0) throw NumericError(c.output_dir + ": " + res.message);
      return res;
    };
    const auto a = run(fogan_cfg);
    const auto b = run(wgan_cfg);
    const double limit = a.bayes->mean;
    const double bound = 1.5 * limit;
    auto final_smoothed = [&](const eval::ExperimentResult& res) {
      return eval::moving_average(res.metric("jsd"), fogan_cfg.smooth).back();
    };
    const double fa = final_smoothed(a);
    const double fb = final_smoothed(b);
    auto lowest = [&](const eval::ExperimentResult& res) {
      const auto m = eval::moving_average(res.metric("jsd"), fogan_cfg.smooth);
      return *std::min_element(m.begin(), m.end());
    };
    if (!report_dir.empty()) {
      eval::write_comparison_plot((std::filesystem::path(report_dir) / "toytext_jsd.svg").string(), "jsd",
                                  {{"FOGAN", a}, {"WGAN-GP", b}}, fogan_cfg.smooth);
    }
    r.passed = fa < bound && fb < bound;
    r.detail = "bayes limit " + num(limit) + " (n=" + std::to_string(fogan_cfg.eval_samples) +
               "), final smoothed JSD fogan " + num(fa) + ", wgan-gp " + num(fb) + ", bound " + num(bound) +
               " (lowest " + num(lowest(a)) + ", " + num(lowest(b)) + ")";
  });
}

CheckResult check_equality_case() {
  return timed(10, "equality case of the first order rule", 5.0, [](CheckResult& r) {
    Rng rng(1010);
    double worst = 0.0;
    int cases = 0;
    for (int dim : {1, 2, 3}) {
      for (int k = 0; k < 4; ++k) {
        Point a(static_cast<std::size_t>(dim));
        Point theta(static_cast<std::size_t>(dim));
        for (auto& v : a) v = rng.normal();
        for (auto& v : theta) v = rng.normal() + 2.0;
        const double lambda = 0.1 + rng.uniform();
        const DivergenceSpec spec{DivergenceKind::FirstOrderPW, lambda, 0.5 + rng.uniform(), 0.0};
        const Critic f = cone_critic(a, rng.normal(), 1.0 / (2.0 * lambda));
        const auto p = EmpiricalMeasure::dirac(a);
        const auto fam = GeneratorFamily::dirac(theta);
        for (const std::optional<StretchSpec>& stretch : {std::optional<StretchSpec>{}, std::optional<StretchSpec>{StretchSpec{0.1}}}) {
          const auto half = generator_update_fogan(f, fam, p, stretch, 4, 5 + k);
          const auto full = generator_update_envelope(spec, f, p, fam, 4, 5 + k, stretch);
          for (std::size_t i = 0; i < half.size(); ++i) worst = std::max(worst, std::abs(half[i] - full[i]));
          ++cases;
        }
      }
    }
    r.passed = worst <= 1e-6;
    r.detail = std::to_string(cases) + " cases in 1-3 dimensions, max |fogan - envelope| = " + num(worst);
  });
}

std::vector<CheckEntry> all_checks(const std::string& report_dir) {
  return {
      {1, "dirac", false, check_dirac_closed_form},
      {2, "geometry", false, check_fixed_critic_geometry},
      {3, "counterexample", false, check_wgan_gp_counterexample},
      {4, "optimality", false, check_fixed_point_optimality},
      {5, "penalty", false, check_penalty_nulling},
      {6, "nested", false, check_nested_gradients},
      {7, "variance", false, check_variance},
      {8, "ring", true, check_mode_recovery},
      {9, "toytext", true, [report_dir] { return check_toy_text(report_dir); }},
      {10, "equality", false, check_equality_case},
  };
}

std::string format_result(const CheckResult& r) {
  char head[160];
  std::snprintf(head, sizeof head, "[%s] %2d %-40s %8.2f s (limit %g s)", r.passed ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.seconds, r.budget_seconds);
  return std::string(head) + "  " + r.detail;
}

}  // namespace fogan::checks
