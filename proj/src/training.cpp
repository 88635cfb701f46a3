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

#include "fogan/training.hpp"

#include <algorithm>
#include <cmath>

#include "fogan/error.hpp"

namespace fogan {

using ad::Var;

namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void require_finite(std::span<const double> v, const char* what) {
  if (!all_finite(v)) throw NumericError(std::string(what) + ": non-finite gradient");
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// m2 of the generator term: E_Q[m2(f)] enters tau with a minus sign.
Var m2(const DivergenceSpec& spec, Var f) {
  if (spec.kind == DivergenceKind::ClassicGan) return -ad::log(1.0 - f);
  return f;
}

}  // namespace

// ---------------------------------------------------------------------------

Optimizer::Optimizer(OptimizerConfig config, std::size_t size)
    : config_(config), m_(size, 0.0), v_(size, 0.0) {
  if (config_.kind == OptimizerKind::Adam) {
    if (!(config_.beta1 >= 0.0 && config_.beta1 < 1.0)) throw ConfigError("adam beta1 must be in [0,1)");
    if (!(config_.beta2 >= 0.0 && config_.beta2 < 1.0)) throw ConfigError("adam beta2 must be in [0,1)");
    if (!(config_.epsilon > 0.0)) throw ConfigError("adam epsilon must be > 0");
  }
}

void Optimizer::step(std::vector<double>& params, std::span<const double> direction, double lr) {
  if (params.size() != m_.size() || direction.size() != m_.size()) {
    throw ShapeError("optimizer: parameter size mismatch");
  }
  ++t_;
  if (config_.kind == OptimizerKind::Sgd) {
    for (std::size_t k = 0; k < params.size(); ++k) params[k] += lr * direction[k];
    return;
  }
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, t_);
  const double c2 = 1.0 - std::pow(b2, t_);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = direction[k];
    m_[k] = b1 * m_[k] + (1.0 - b1) * g;
    v_[k] = b2 * v_[k] + (1.0 - b2) * g * g;
    const double mh = m_[k] / c1;
    const double vh = v_[k] / c2;
    params[k] += lr * mh / (std::sqrt(vh) + config_.epsilon);
  }
}

std::string to_string(UpdateRule r) {
  switch (r) {
    case UpdateRule::FoganHalfGrad: return "fogan_half_grad";
    case UpdateRule::EnvelopeFullGrad: return "envelope_full_grad";
    case UpdateRule::WganNaive: return "wgan_naive";
  }
  return "unknown";
}

UpdateRule parse_update_rule(const std::string& name) {
  if (name == "fogan_half_grad" || name == "fogan") return UpdateRule::FoganHalfGrad;
  if (name == "envelope_full_grad" || name == "envelope") return UpdateRule::EnvelopeFullGrad;
  if (name == "wgan_naive" || name == "naive") return UpdateRule::WganNaive;
  throw ConfigError("unknown update rule '" + name + "'");
}

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adam") return OptimizerKind::Adam;
  throw ConfigError("unknown optimizer '" + name + "'");
}

void TrainConfig::validate() const {
  divergence.validate();
  if (!(critic_lr > 0.0)) throw ConfigError("critic_lr must be > 0");
  if (!(generator_lr > 0.0)) throw ConfigError("generator_lr must be > 0");
  if (critic_iters < 1) throw ConfigError("critic_iters must be >= 1");
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (total_iters < 0) throw ConfigError("total_iters must be >= 0");
  if (lr_drop_iter < 0) throw ConfigError("lr_drop_iter must be >= 0");
  if (stretch) stretch->validate();
}

// ---------------------------------------------------------------------------

GeneratorBatch draw_generator_batch(const GeneratorFamily& family, std::size_t batch_size,
                                    const std::optional<StretchSpec>& stretch,
                                    const std::function<Point(Rng&)>& partner_sampler,
                                    Rng& latent_rng, Rng& partner_rng) {
  GeneratorBatch b;
  b.latents.reserve(batch_size);
  for (std::size_t k = 0; k < batch_size; ++k) b.latents.push_back(family.draw_latent(latent_rng));
  if (stretch) {
    stretch->validate();
    if (!partner_sampler) throw UsageError("stretching needs a sampler for the real distribution");
    for (std::size_t k = 0; k < batch_size; ++k) {
      b.partners.push_back(partner_sampler(partner_rng));
      b.alphas.push_back(partner_rng.uniform(0.0, stretch->epsilon));
    }
  }
  return b;
}

std::vector<std::vector<Var>> generated_points(ad::Tape& tape, const GeneratorFamily& family,
                                               std::span<const Var> theta,
                                               const GeneratorBatch& batch) {
  const bool stretched = !batch.alphas.empty();
  if (stretched && (batch.alphas.size() != batch.latents.size() ||
                    batch.partners.size() != batch.latents.size())) {
    throw ShapeError("generator batch: stretch draws do not match the latents");
  }
  std::vector<std::vector<Var>> out;
  out.reserve(batch.latents.size());
  for (std::size_t k = 0; k < batch.latents.size(); ++k) {
    auto x = family.push(tape, theta, batch.latents[k]);
    if (stretched) {
      const double a = batch.alphas[k];
      const Point& partner = batch.partners[k];
      if (partner.size() != x.size()) throw ShapeError("stretch partner has the wrong dimension");
      for (std::size_t c = 0; c < x.size(); ++c) x[c] = x[c] * (1.0 - a) + a * partner[c];
    }
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<double> fogan_direction(const Critic& critic, const GeneratorFamily& family,
                                    const GeneratorBatch& batch) {
  if (batch.latents.empty()) throw UsageError("empty generator batch");
  ad::Tape tape;
  const auto theta = tape.variables(family.theta());
  const auto xs = generated_points(tape, family, theta, batch);
  std::vector<Var> fs;
  fs.reserve(xs.size());
  for (const auto& x : xs) fs.push_back(critic.value(tape, x));
  const Var mean_f = tape.nary_sum(fs) * (0.5 / static_cast<double>(xs.size()));
  auto g = ad::grad_values(mean_f, theta);
  require_finite(g, "fogan update");
  return g;
}

std::vector<double> naive_direction(const DivergenceSpec& spec, const Critic& critic,
                                    const GeneratorFamily& family, const GeneratorBatch& batch) {
  if (batch.latents.empty()) throw UsageError("empty generator batch");
  ad::Tape tape;
  const auto theta = tape.variables(family.theta());
  const auto xs = generated_points(tape, family, theta, batch);
  std::vector<Var> terms;
  terms.reserve(xs.size());
  for (const auto& x : xs) terms.push_back(m2(spec, critic.value(tape, x)));
  const Var mean = tape.nary_sum(terms) * (1.0 / static_cast<double>(xs.size()));
  auto g = ad::grad_values(mean, theta);
  require_finite(g, "naive update");
  return g;
}

std::vector<double> envelope_direction(const DivergenceSpec& spec, const Critic& critic,
                                       const EmpiricalMeasure& p_batch,
                                       const GeneratorFamily& family, const GeneratorBatch& batch,
                                       const InterpolationPlan* gp_plan) {
  if (batch.latents.empty()) throw UsageError("empty generator batch");
  ad::Tape tape;
  const auto theta = tape.variables(family.theta());
  VarMeasure q;
  q.points = generated_points(tape, family, theta, batch);
  q.weights.assign(q.points.size(), 1.0 / static_cast<double>(q.points.size()));
  const VarMeasure p = VarMeasure::constant(tape, p_batch);
  BuildOptions opts;
  opts.norm_smoothing = kNormSmoothing;
  opts.gp_plan = gp_plan;
  const auto nodes = build_divergence(tape, spec, p, q, critic, opts);
  auto g = ad::grad_values(nodes.value, theta);
  for (double& x : g) x = -x;
  require_finite(g, "envelope update");
  return g;
}

namespace {

// Stream layout shared by the public update functions and the probe.
constexpr std::uint64_t kLatentStream = 1;
constexpr std::uint64_t kPStream = 2;

std::function<Point(Rng&)> measure_sampler(const EmpiricalMeasure& m) {
  return [&m](Rng& rng) { return m.point(draw_index(m, rng)); };
}

EmpiricalMeasure p_minibatch(const EmpiricalMeasure& p, std::size_t count, Rng& rng) {
  std::vector<Point> pts;
  pts.reserve(count);
  for (std::size_t k = 0; k < count; ++k) pts.push_back(p.point(draw_index(p, rng)));
  return EmpiricalMeasure(std::move(pts));
}

}  // namespace

std::vector<double> generator_update_fogan(const Critic& critic, const GeneratorFamily& family,
                                           const EmpiricalMeasure& p,
                                           const std::optional<StretchSpec>& stretch,
                                           std::size_t batch_size, std::uint64_t seed) {
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  family.validate();
  Rng latent_rng(derive_seed(seed, kLatentStream));
  Rng partner_rng(derive_seed(seed, kPStream));
  const auto batch = draw_generator_batch(family, batch_size, stretch, measure_sampler(p),
                                          latent_rng, partner_rng);
  return fogan_direction(critic, family, batch);
}

std::vector<double> generator_update_envelope(const DivergenceSpec& spec, const Critic& critic,
                                              const EmpiricalMeasure& p,
                                              const GeneratorFamily& family,
                                              std::size_t batch_size, std::uint64_t seed,
                                              const std::optional<StretchSpec>& stretch) {
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  family.validate();
  Rng latent_rng(derive_seed(seed, kLatentStream));
  Rng p_rng(derive_seed(seed, kPStream));
  const auto batch = draw_generator_batch(family, batch_size, stretch, measure_sampler(p),
                                          latent_rng, p_rng);
  const auto p_batch = p_minibatch(p, batch_size, p_rng);
  InterpolationPlan plan;
  const InterpolationPlan* plan_ptr = nullptr;
  if (spec.kind == DivergenceKind::WganGp) {
    // The plan pairs P draws with generator draws; only its indices matter.
    std::vector<Point> zeros(batch_size, Point(static_cast<std::size_t>(p.dim()), 0.0));
    plan = InterpolationPlan::monte_carlo(p_batch, EmpiricalMeasure(zeros), batch_size, p_rng);
    plan_ptr = &plan;
  }
  return envelope_direction(spec, critic, p_batch, family, batch, plan_ptr);
}

namespace {

// Welford accumulator; identical inputs give a variance of exactly zero.
struct RunningMoments {
  std::vector<double> mean;
  std::vector<double> m2;
  int count = 0;

  void add(std::span<const double> x) {
    if (count == 0) {
      mean.assign(x.size(), 0.0);
      m2.assign(x.size(), 0.0);
    }
    ++count;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double d = x[k] - mean[k];
      mean[k] += d / count;
      m2[k] += d * (x[k] - mean[k]);
    }
  }

  UpdateReport report(UpdateRule rule) const {
    UpdateReport r;
    r.rule = rule;
    r.grad_estimate = mean;
    r.per_batch_variance.resize(m2.size());
    for (std::size_t k = 0; k < m2.size(); ++k) r.per_batch_variance[k] = std::max(0.0, m2[k] / count);
    r.batches_used = count;
    return r;
  }
};

}  // namespace

std::pair<UpdateReport, UpdateReport> variance_probe(const DivergenceSpec& spec,
                                                     const Critic& critic,
                                                     const EmpiricalMeasure& p_population,
                                                     const GeneratorFamily& family,
                                                     std::size_t batch_size, int repeats,
                                                     std::uint64_t seed) {
  if (repeats < 30) throw UsageError("variance_probe needs repeats >= 30");
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  family.validate();
  Rng latent_rng(derive_seed(seed, kLatentStream));
  Rng unused(0);
  const auto batch = draw_generator_batch(family, batch_size, std::nullopt, {}, latent_rng, unused);

  RunningMoments fogan;
  RunningMoments envelope;
  for (int r = 0; r < repeats; ++r) {
    Rng p_rng(derive_seed(seed, kPStream + static_cast<std::uint64_t>(r)));
    const auto p_batch = p_minibatch(p_population, batch_size, p_rng);
    InterpolationPlan plan;
    const InterpolationPlan* plan_ptr = nullptr;
    if (spec.kind == DivergenceKind::WganGp) {
      std::vector<Point> zeros(batch_size, Point(static_cast<std::size_t>(p_population.dim()), 0.0));
      plan = InterpolationPlan::monte_carlo(p_batch, EmpiricalMeasure(zeros), batch_size, p_rng);
      plan_ptr = &plan;
    }
    fogan.add(fogan_direction(critic, family, batch));
    envelope.add(envelope_direction(spec, critic, p_batch, family, batch, plan_ptr));
  }
  return {fogan.report(UpdateRule::FoganHalfGrad), envelope.report(UpdateRule::EnvelopeFullGrad)};
}

// ---------------------------------------------------------------------------

Critic frozen_critic_for(const DivergenceSpec& spec, const Mlp& critic) {
  Critic base = frozen_mlp_critic(critic);
  if (spec.kind != DivergenceKind::ClassicGan) return base;
  return Critic(
      [base](ad::Tape& tape, std::span<const Var> x) { return ad::sigmoid(base.value(tape, x)); },
      [base](ad::Tape& tape, std::span<const Var> x) {
        auto ev = base.value_and_gradient(tape, x);
        const Var s = ad::sigmoid(ev.value);
        const Var slope = s * (1.0 - s);
        CriticEval out{s, {}};
        for (const Var& g : ev.gradient) out.gradient.push_back(slope * g);
        return out;
      });
}

DivergenceEstimate critic_step(const TrainConfig& config, Mlp& critic, Optimizer& optimizer,
                               const EmpiricalMeasure& p_batch, const EmpiricalMeasure& q_batch,
                               Rng& rng, ad::Tape& tape) {
  tape.clear();
  const auto params = critic.bind_variables(tape);
  const Critic c = config.divergence.kind == DivergenceKind::ClassicGan
                       ? sigmoid_mlp_critic(critic, params)
                       : mlp_critic(critic, params);
  const VarMeasure vp = VarMeasure::constant(tape, p_batch);
  const VarMeasure vq = VarMeasure::constant(tape, q_batch);
  InterpolationPlan plan;
  BuildOptions opts;
  opts.norm_smoothing = kNormSmoothing;
  if (config.divergence.kind == DivergenceKind::WganGp) {
    plan = InterpolationPlan::monte_carlo(p_batch, q_batch, p_batch.size(), rng);
    opts.gp_plan = &plan;
  }
  const auto nodes = build_divergence(tape, config.divergence, vp, vq, c, opts);
  DivergenceEstimate est;
  est.value = nodes.value.value();
  est.objective_part = nodes.objective.value();
  est.penalty_lambda = nodes.penalty_lambda.value();
  est.penalty_mu = nodes.penalty_mu.value();
  est.penalty_gp = nodes.penalty_gp.value();
  est.clamped = nodes.clamped;
  if (!std::isfinite(est.value)) throw NumericError("critic loss is not finite");
  const auto g = ad::grad_values(nodes.value, params);
  require_finite(g, "critic step");
  std::vector<double> theta = critic.params();
  optimizer.step(theta, g, config.critic_lr);
  critic.set_params(theta);
  return est;
}

TrainingTrace train(const TrainConfig& config, const TargetSampler& target,
                    GeneratorFamily& generator, Mlp& critic, const TrainCallbacks& callbacks) {
  config.validate();
  generator.validate();
  if (!target) throw UsageError("train: missing target sampler");
  if (critic.input_dim() != generator.output_dim()) {
    throw ShapeError("train: critic input does not match generator output");
  }

  Rng real_rng(derive_seed(config.seed, 11));
  Rng latent_rng(derive_seed(config.seed, 12));
  Rng stretch_rng(derive_seed(config.seed, 13));
  Rng plan_rng(derive_seed(config.seed, 14));

  const auto b = static_cast<std::size_t>(config.batch_size);
  Optimizer critic_opt(config.optimizer, critic.param_count());
  Optimizer gen_opt(config.optimizer, generator.theta().size());
  ad::Tape tape;
  TrainingTrace trace;
  TrainConfig step_config = config;

  auto real_batch = [&]() {
    std::vector<Point> pts;
    pts.reserve(b);
    for (std::size_t k = 0; k < b; ++k) pts.push_back(target(real_rng));
    return EmpiricalMeasure(std::move(pts));
  };

  try {
    for (int iter = 0; iter < config.total_iters; ++iter) {
      TraceRow row;
      row.iter = iter;
      const bool dropped = config.lr_drop_iter > 0 && iter >= config.lr_drop_iter;
      step_config.critic_lr = dropped ? config.critic_lr / 10.0 : config.critic_lr;
      const double generator_lr = dropped ? config.generator_lr / 10.0 : config.generator_lr;
      for (int k = 0; k < config.critic_iters; ++k) {
        const auto p_batch = real_batch();
        const auto gb = draw_generator_batch(generator, b, config.stretch, target, latent_rng,
                                             stretch_rng);
        std::vector<Point> q_pts;
        q_pts.reserve(b);
        for (std::size_t n = 0; n < b; ++n) {
          Point x = generator.push_values(gb.latents[n]);
          if (config.stretch) {
            const double a = gb.alphas[n];
            for (std::size_t c = 0; c < x.size(); ++c) x[c] = x[c] * (1.0 - a) + a * gb.partners[n][c];
          }
          q_pts.push_back(std::move(x));
        }
        row.critic_estimate =
            critic_step(step_config, critic, critic_opt, p_batch, EmpiricalMeasure(std::move(q_pts)),
                        plan_rng, tape);
      }

      const Critic frozen = frozen_critic_for(config.divergence, critic);
      const auto gb =
          draw_generator_batch(generator, b, config.stretch, target, latent_rng, stretch_rng);
      std::vector<double> direction;
      switch (config.rule) {
        case UpdateRule::FoganHalfGrad:
          direction = fogan_direction(frozen, generator, gb);
          break;
        case UpdateRule::WganNaive:
          direction = naive_direction(config.divergence, frozen, generator, gb);
          break;
        case UpdateRule::EnvelopeFullGrad: {
          const auto p_batch = real_batch();
          InterpolationPlan plan;
          const InterpolationPlan* plan_ptr = nullptr;
          if (config.divergence.kind == DivergenceKind::WganGp) {
            std::vector<Point> zeros(b, Point(static_cast<std::size_t>(generator.output_dim()), 0.0));
            plan = InterpolationPlan::monte_carlo(p_batch, EmpiricalMeasure(zeros), b, plan_rng);
            plan_ptr = &plan;
          }
          direction = envelope_direction(config.divergence, frozen, p_batch, generator, gb, plan_ptr);
          break;
        }
      }
      row.grad_norm = norm2(direction);
      std::vector<double> theta = generator.theta();
      gen_opt.step(theta, direction, generator_lr);
      if (!all_finite(theta)) throw NumericError("generator parameters became non-finite");
      generator.set_theta(theta);
      generator.validate();

      if (callbacks.on_step) callbacks.on_step(iter, generator, critic, row);
      trace.rows.push_back(std::move(row));
    }
  } catch (const NumericError& e) {
    trace.aborted = true;
    trace.abort_reason = e.what();
  } catch (const DomainError& e) {
    trace.aborted = true;
    trace.abort_reason = e.what();
  }
  return trace;
}

TrainingTrace train(const TrainConfig& config, const EmpiricalMeasure& target,
                    GeneratorFamily& generator, Mlp& critic, const TrainCallbacks& callbacks) {
  if (target.size() == 0) throw UsageError("train: empty target measure");
  return train(
      config, [&target](Rng& rng) { return target.point(draw_index(target, rng)); }, generator,
      critic, callbacks);
}

}  // namespace fogan
