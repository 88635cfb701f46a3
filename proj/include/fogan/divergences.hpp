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
#include <span>
#include <string>
#include <vector>

#include "fogan/autodiff.hpp"
#include "fogan/measures.hpp"
#include "fogan/nets.hpp"

namespace fogan {

enum class DivergenceKind { ClassicGan, WganGp, PenalizedW, FirstOrderPW };

std::string to_string(DivergenceKind k);
DivergenceKind parse_divergence_kind(const std::string& name);

struct DivergenceSpec {
  DivergenceKind kind = DivergenceKind::FirstOrderPW;
  double lambda = 0.1;
  double mu = 1.0;
  double gp_weight = 10.0;

  void validate() const;
};

struct DivergenceEstimate {
  double value = 0.0;
  double objective_part = 0.0;
  double penalty_lambda = 0.0;
  double penalty_mu = 0.0;
  double penalty_gp = 0.0;
  bool clamped = false;

  double penalty_part() const { return penalty_lambda + penalty_mu + penalty_gp; }
};

// Critic value and, when requested, its input gradient, both as nodes.
struct CriticEval {
  ad::Var value;
  std::vector<ad::Var> gradient;
};

class Critic {
 public:
  using ValueFn = std::function<ad::Var(ad::Tape&, std::span<const ad::Var>)>;
  using GradFn = std::function<CriticEval(ad::Tape&, std::span<const ad::Var>)>;

  Critic() = default;
  // Input gradients come from a retaped reverse pass over `value`.
  explicit Critic(ValueFn value);
  Critic(ValueFn value, GradFn value_and_gradient);

  ad::Var value(ad::Tape& tape, std::span<const ad::Var> x) const;
  CriticEval value_and_gradient(ad::Tape& tape, std::span<const ad::Var> x) const;

  // Convenience numeric evaluation on a scratch tape.
  double value_at(std::span<const double> x) const;
  std::vector<double> gradient_at(std::span<const double> x) const;

 private:
  ValueFn value_;
  GradFn value_and_gradient_;
};

// Copy of x in which constant nodes are replaced by fresh variables of equal
// value, so that a reverse pass can reach them.
std::vector<ad::Var> differentiable_inputs(ad::Tape& tape, std::span<const ad::Var> x);

// Critic backed by a scalar-head network whose parameters already live on
// `tape` as `params` (constants for a frozen critic, variables to train it).
Critic mlp_critic(const Mlp& net, std::vector<ad::Var> params);

// Frozen copy of a scalar-head network usable on any tape; parameters are
// bound as constants once per tape generation.
Critic frozen_mlp_critic(const Mlp& net);

// Network critic with a sigmoid applied to its scalar head, for the classic
// GAN divergence.
Critic sigmoid_mlp_critic(const Mlp& net, std::vector<ad::Var> params);

// Measure whose points are nodes, so that they can depend on generator
// parameters.
struct VarMeasure {
  std::vector<std::vector<ad::Var>> points;
  std::vector<double> weights;

  static VarMeasure constant(ad::Tape& tape, const EmpiricalMeasure& m);
  std::size_t size() const { return points.size(); }
};

// Interpolation pairs for the WGAN-GP penalty: (p index, q index, alpha,
// weight). The penalty is sum_k weight_k (|grad f(alpha x + (1-alpha) x')| - 1)^2.
struct InterpolationPlan {
  struct Entry {
    std::size_t i;
    std::size_t j;
    double alpha;
    double weight;
  };
  std::vector<Entry> entries;

  // Gauss-Legendre rule in alpha over every pair, weighted by both measures.
  static InterpolationPlan quadrature(const std::vector<double>& pw, const std::vector<double>& qw,
                                      int nodes = 16);
  // `count` independent (x, x', alpha) triples with equal weight.
  static InterpolationPlan monte_carlo(const EmpiricalMeasure& p, const EmpiricalMeasure& q,
                                       std::size_t count, Rng& rng);
};

struct DivergenceNodes {
  ad::Var value;
  ad::Var objective;
  ad::Var penalty_lambda;
  ad::Var penalty_mu;
  ad::Var penalty_gp;
  bool clamped = false;
};

struct BuildOptions {
  // Norms inside the mu-penalty and the gradient penalty are computed as
  // sqrt(|v|^2 + smoothing^2). Zero keeps exact norms.
  double norm_smoothing = 0.0;
  const InterpolationPlan* gp_plan = nullptr;  // required for WganGp
};

inline constexpr double kNormSmoothing = 1e-12;

DivergenceNodes build_divergence(ad::Tape& tape, const DivergenceSpec& spec, const VarMeasure& p,
                                 const VarMeasure& q, const Critic& critic,
                                 const BuildOptions& options);

// Plug-in estimate with exact finite sums. The WGAN-GP penalty integrates
// alpha with a 16-node Gauss-Legendre rule.
DivergenceEstimate estimate(const DivergenceSpec& spec, const EmpiricalMeasure& p,
                            const EmpiricalMeasure& q, const Critic& critic);

double wgan_gp_penalty(const EmpiricalMeasure& p, const EmpiricalMeasure& q, const Critic& critic,
                       std::size_t count, std::uint64_t seed);

// sum_j q_j (|grad f(x'_j)| - |v_j| / W_j)^2 with
// v_j = sum_i p_i (x_i - x'_j)(f(x_i) - f(x'_j)) / |x_i - x'_j|^3 and
// W_j = sum_i p_i / |x_i - x'_j|.
double fogan_penalty_G(const EmpiricalMeasure& p, const EmpiricalMeasure& q, const Critic& critic);

// Exact W1 for one-dimensional measures via the CDF difference.
double wasserstein_1d_exact(const EmpiricalMeasure& p, const EmpiricalMeasure& q);

// Gauss-Legendre nodes and weights mapped to [0, 1].
void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace fogan
