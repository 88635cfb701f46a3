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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fogan/divergences.hpp"
#include "fogan/eval/experiment.hpp"
#include "fogan/measures.hpp"

namespace fogan::checks {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

// --- Oracles -----------------------------------------------------------

// Maximum of the penalized objective over tabular critics, from the
// stationarity system 2 lambda L f = (p, -q) solved with an LDLT
// factorization after pinning the last value.
double brute_force_tau_p(const EmpiricalMeasure& p, const EmpiricalMeasure& q, double lambda);

// Derivatives at theta0 for P = delta_0, Q = U([0, theta]) and the critic
// f(x) = -(theta/2 + 1) x, evaluated by Gauss-Legendre quadrature and central
// differences. The objective term integrates the critic frozen at theta0
// without the 1/theta density factor; the penalty term uses the critic that
// belongs to each theta and averages (|f'| - 1)^2 over the interpolates.
struct CounterexampleDerivatives {
  double d_objective = 0.0;
  double d_penalty = 0.0;
  double gamma() const { return d_penalty / d_objective; }
};
CounterexampleDerivatives wgan_gp_counterexample(double theta0, double h = 1e-4);

// f(y) = f(a) - c |a - y| in any dimension.
Critic cone_critic(Point apex, double apex_value, double slope);

// Parameter gradient of the full first order penalized loss on the tape
// against central differences of estimate(). Returns the largest
// |g - fd| / max(|g|, |fd|, r), where r = eps |L| / (h tolerance) is the
// smallest component a central difference can resolve to that tolerance.
double critic_loss_gradient_error(const Mlp& net, const DivergenceSpec& spec,
                                  const EmpiricalMeasure& p, const EmpiricalMeasure& q,
                                  double h = 1e-5, double tolerance = 1e-4);

// --- Criteria ----------------------------------------------------------

CheckResult check_dirac_closed_form();
CheckResult check_fixed_critic_geometry();
CheckResult check_wgan_gp_counterexample();
CheckResult check_fixed_point_optimality();
CheckResult check_penalty_nulling();
CheckResult check_nested_gradients();
CheckResult check_variance();
CheckResult check_mode_recovery();
CheckResult check_toy_text(const std::string& report_dir = "");
CheckResult check_equality_case();

// Configs behind the two training criteria.
eval::ExperimentConfig ring_config(std::uint64_t seed);
eval::ExperimentConfig toy_text_config(UpdateRule rule, DivergenceKind kind);

struct CheckEntry {
  int id;
  std::string name;
  bool slow;  // trains networks for minutes
  std::function<CheckResult()> run;
};

std::vector<CheckEntry> all_checks(const std::string& report_dir = "");

std::string format_result(const CheckResult& r);

}  // namespace fogan::checks
