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

#include <span>
#include <utility>
#include <vector>

#include "fogan/autodiff.hpp"
#include "fogan/divergences.hpp"
#include "fogan/measures.hpp"

namespace fogan {

// Critic values on supp(p) followed by supp(q).
struct TabularCritic {
  std::vector<Point> support;
  std::vector<double> values;
  std::size_t p_count = 0;  // indices [0, p_count) belong to p, the rest to q
  double lambda = 0.0;

  std::size_t q_count() const { return support.size() - p_count; }
  double p_value(std::size_t i) const { return values[i]; }
  double q_value(std::size_t j) const { return values[p_count + j]; }

  static TabularCritic from_values(const EmpiricalMeasure& p, const EmpiricalMeasure& q,
                                   std::vector<double> values, double lambda);
};

struct FixedPointReport {
  int iterations = 0;
  double final_delta = 0.0;
  double slope_residual_p = 0.0;
  double slope_residual_q = 0.0;
  bool converged = false;
  // Sup-norm change of every sweep, and the geometric rate fitted to them.
  std::vector<double> deltas;
  double contraction_rate = 0.0;
};

inline constexpr double kSolverTolerance = 1e-12;
inline constexpr int kSolverMaxIters = 10000;

TabularCritic apply_T(const TabularCritic& critic, const EmpiricalMeasure& p,
                      const EmpiricalMeasure& q, double lambda);

// Throws DegenerateCriticError when E[(f(x) - f(x')) / |x - x'|] is zero.
TabularCritic apply_S(const TabularCritic& critic, const EmpiricalMeasure& p,
                      const EmpiricalMeasure& q, double lambda);

std::pair<TabularCritic, FixedPointReport> solve_optimal_critic(
    const EmpiricalMeasure& p, const EmpiricalMeasure& q, double lambda,
    double tolerance = kSolverTolerance, int max_iters = kSolverMaxIters);

// Largest deviation of E_p[(f(x) - f(x'))/|x - x'|] from 1/(2 lambda) over x'
// in supp(q) (second), and of E_q[(f(x) - f(x'))/|x - x'|] over x in supp(p)
// (first).
std::pair<double, double> slope_residuals(const TabularCritic& critic, const EmpiricalMeasure& p,
                                          const EmpiricalMeasure& q, double lambda);

// E_p E_q [(f(x) - f(x'))/|x - x'|].
double normalizer(const TabularCritic& critic, const EmpiricalMeasure& p, const EmpiricalMeasure& q);

// Penalized objective of a tabular critic.
double tau_p_value(const TabularCritic& critic, const EmpiricalMeasure& p,
                   const EmpiricalMeasure& q, double lambda);

// C1 extension of a solved tabular critic. Away from supp(p) the value is
//   f(y) = (sum_i p_i f_i / |x_i - y| - 1/(2 lambda)) / sum_i p_i / |x_i - y|,
// whose gradient on supp(q) is the field that zeroes the first order penalty.
// Support points return their tabular values exactly.
class ExtendedCritic {
 public:
  ExtendedCritic(TabularCritic critic, EmpiricalMeasure p, EmpiricalMeasure q);

  double value(std::span<const double> y) const;
  std::vector<double> gradient(std::span<const double> y) const;
  CriticEval build(ad::Tape& tape, std::span<const ad::Var> query) const;
  Critic as_critic() const;

  const TabularCritic& table() const { return critic_; }

 private:
  TabularCritic critic_;
  EmpiricalMeasure p_;
  EmpiricalMeasure q_;
};

ExtendedCritic extend_critic_c1(const TabularCritic& critic, const EmpiricalMeasure& p,
                                const EmpiricalMeasure& q);

}  // namespace fogan
