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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fogan/autodiff.hpp"
#include "fogan/divergences.hpp"
#include "fogan/measures.hpp"
#include "fogan/nets.hpp"

namespace fogan {

enum class OptimizerKind { Sgd, Adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double beta1 = 0.0;
  double beta2 = 0.9;
  double epsilon = 1e-8;
};

// Adds lr times the (possibly Adam-normalized) direction to the parameters.
// Callers hand in ascent directions for critics and descent directions for
// generators, so the sign is never flipped here.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, std::size_t size);
  void step(std::vector<double>& params, std::span<const double> direction, double lr);
  int steps() const { return t_; }

 private:
  OptimizerConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  int t_ = 0;
};

enum class UpdateRule { FoganHalfGrad, EnvelopeFullGrad, WganNaive };

std::string to_string(UpdateRule r);
UpdateRule parse_update_rule(const std::string& name);
OptimizerKind parse_optimizer(const std::string& name);

inline constexpr double kDefaultStretchEpsilon = 0.1;

struct TrainConfig {
  DivergenceSpec divergence;
  double critic_lr = 1e-4;
  double generator_lr = 1e-4;
  int critic_iters = 5;
  int batch_size = 64;
  // Q'_theta sampling for the critic and the generator step. Empty means
  // plain Q_theta.
  std::optional<StretchSpec> stretch = StretchSpec{kDefaultStretchEpsilon};
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  int total_iters = 1000;
  UpdateRule rule = UpdateRule::FoganHalfGrad;
  // From this iteration on both learning rates are divided by 10. Zero keeps
  // them constant.
  int lr_drop_iter = 0;

  void validate() const;
};

struct UpdateReport {
  UpdateRule rule = UpdateRule::FoganHalfGrad;
  std::vector<double> grad_estimate;       // mean over batches
  std::vector<double> per_batch_variance;  // elementwise, population variance
  int batches_used = 0;
};

// Random inputs of one generator step: latent draws, and for the stretched
// distribution one real partner point and one alpha per latent.
struct GeneratorBatch {
  std::vector<Point> latents;
  std::vector<Point> partners;
  std::vector<double> alphas;
};

GeneratorBatch draw_generator_batch(const GeneratorFamily& family, std::size_t batch_size,
                                    const std::optional<StretchSpec>& stretch,
                                    const std::function<Point(Rng&)>& partner_sampler,
                                    Rng& latent_rng, Rng& partner_rng);

// Generated (optionally stretched) points as functions of theta.
std::vector<std::vector<ad::Var>> generated_points(ad::Tape& tape, const GeneratorFamily& family,
                                                   std::span<const ad::Var> theta,
                                                   const GeneratorBatch& batch);

// 1/2 grad_theta E[f(x')] on the given batch: the low variance direction.
std::vector<double> fogan_direction(const Critic& critic, const GeneratorFamily& family,
                                    const GeneratorBatch& batch);

// grad_theta E_Q[m2(f)] on the given batch, ignoring the penalty.
std::vector<double> naive_direction(const DivergenceSpec& spec, const Critic& critic,
                                    const GeneratorFamily& family, const GeneratorBatch& batch);

// -grad_theta tau(P_batch || Q_theta; f) with the critic frozen, penalty
// included. `gp_plan` is required for WGAN-GP.
std::vector<double> envelope_direction(const DivergenceSpec& spec, const Critic& critic,
                                       const EmpiricalMeasure& p_batch,
                                       const GeneratorFamily& family, const GeneratorBatch& batch,
                                       const InterpolationPlan* gp_plan);

// Descent direction 1/2 grad_theta E_{x' ~ Q'_theta}[f(x')] from batch_size
// draws. Stretching pairs generated points with draws from p.
std::vector<double> generator_update_fogan(const Critic& critic, const GeneratorFamily& family,
                                           const EmpiricalMeasure& p,
                                           const std::optional<StretchSpec>& stretch,
                                           std::size_t batch_size, std::uint64_t seed);

// Descent direction -grad_theta tau(P || Q_theta; f) from mini-batches of p
// and of the generator, critic frozen, penalty differentiated pathwise.
std::vector<double> generator_update_envelope(const DivergenceSpec& spec, const Critic& critic,
                                              const EmpiricalMeasure& p,
                                              const GeneratorFamily& family,
                                              std::size_t batch_size, std::uint64_t seed,
                                              const std::optional<StretchSpec>& stretch = std::nullopt);

// Holds the generator latents fixed and redraws the P side (mini-batch and
// interpolation draws) `repeats` times. Returns (fogan rule, envelope rule).
std::pair<UpdateReport, UpdateReport> variance_probe(const DivergenceSpec& spec,
                                                     const Critic& critic,
                                                     const EmpiricalMeasure& p_population,
                                                     const GeneratorFamily& family,
                                                     std::size_t batch_size, int repeats,
                                                     std::uint64_t seed);

struct TraceRow {
  int iter = 0;
  DivergenceEstimate critic_estimate;  // last critic step, on its own batch
  double grad_norm = 0.0;              // generator direction
  std::vector<std::pair<std::string, double>> metrics;
};

struct TrainingTrace {
  std::vector<TraceRow> rows;
  bool aborted = false;
  std::string abort_reason;
};

using TargetSampler = std::function<Point(Rng&)>;

struct TrainCallbacks {
  // Called after every generator step; may append metrics to the row.
  std::function<void(int iter, const GeneratorFamily&, const Mlp& critic, TraceRow&)> on_step;
};

// One ascent step of the critic on the given batches. Returns the estimate
// before the step.
DivergenceEstimate critic_step(const TrainConfig& config, Mlp& critic, Optimizer& optimizer,
                               const EmpiricalMeasure& p_batch, const EmpiricalMeasure& q_batch,
                               Rng& rng, ad::Tape& tape);

// Critic for the current critic parameters, matching the divergence kind.
Critic frozen_critic_for(const DivergenceSpec& spec, const Mlp& critic);

TrainingTrace train(const TrainConfig& config, const TargetSampler& target,
                    GeneratorFamily& generator, Mlp& critic, const TrainCallbacks& callbacks = {});

TrainingTrace train(const TrainConfig& config, const EmpiricalMeasure& target,
                    GeneratorFamily& generator, Mlp& critic, const TrainCallbacks& callbacks = {});

}  // namespace fogan
