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
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fogan/eval/config.hpp"
#include "fogan/eval/metrics.hpp"
#include "fogan/measures.hpp"
#include "fogan/nets.hpp"
#include "fogan/training.hpp"

namespace fogan::eval {

// Everything a task needs for training and evaluation.
struct TaskSetup {
  GeneratorFamily generator;
  Mlp critic;
  TargetSampler target;
  // Metrics of the current generator, in a fixed column order.
  std::function<std::vector<std::pair<std::string, double>>(const GeneratorFamily&)> evaluate;
  std::optional<BayesLimit> bayes;
};

TaskSetup make_task(const ExperimentConfig& config);

// Ring of Gaussians used by ring2d.
TargetSampler ring_sampler(int modes, double radius, double sigma);

struct EvalPoint {
  int iter = 0;  // generator steps completed
  std::vector<std::pair<std::string, double>> metrics;
};

struct ExperimentResult {
  int exit_code = 0;
  std::string message;
  TrainingTrace trace;
  std::vector<EvalPoint> evals;
  std::optional<BayesLimit> bayes;
  double seconds = 0.0;

  // Values of one metric column; empty when absent.
  std::vector<double> metric(const std::string& name) const;
  std::vector<double> eval_iters() const;
};

// Trains and evaluates every eval_every steps and at the last step. With
// write_outputs, fills output_dir with trace.csv, metrics.csv, checkpoints,
// summary.json and one SVG per curve. A numeric abort gives exit code 2 and
// keeps the partial trace.
ExperimentResult run_experiment(const ExperimentConfig& config, bool write_outputs = true);

// Loads the file, runs it and reports to `log`. Config errors give exit
// code 1. The finished result is copied to `out` when given.
int run_experiment_file(const std::string& path, std::optional<int> smooth, std::ostream& log,
                        ExperimentResult* out = nullptr);

// One SVG with the same metric from several runs.
void write_comparison_plot(const std::string& path, const std::string& metric,
                           const std::vector<std::pair<std::string, ExperimentResult>>& runs,
                           int smooth);

}  // namespace fogan::eval
