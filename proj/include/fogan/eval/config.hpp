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

#include <map>
#include <string>
#include <vector>

#include "fogan/nets.hpp"
#include "fogan/training.hpp"

namespace fogan::eval {

enum class Task { Dirac1d, Uniform1d, Ring2d, ToyText };

std::string to_string(Task t);
Task parse_task(const std::string& name);

struct ExperimentConfig {
  Task task = Task::Dirac1d;
  TrainConfig train;
  int eval_every = 100;
  int eval_samples = 1000;
  std::string output_dir = "fogan_out";

  // Network shapes (hidden layers only) and the generator latent.
  std::vector<int> critic_hidden{64, 64};
  std::vector<int> generator_hidden{64, 64};
  Activation activation = Activation::SmoothRelu;
  int latent_dim = 2;

  // Task parameters.
  double init_theta = 1.0;      // dirac1d, uniform1d
  double ring_radius = 2.0;     // ring2d
  double ring_sigma = 0.05;     // ring2d
  int ring_modes = 8;           // ring2d
  int ngram_n = 3;              // toytext
  int corpus_size = 20000;      // toytext
  int bayes_repeats = 20;       // toytext
  int smooth = 1;               // moving-average window for plots

  void validate() const;
};

// Flat "key = value" text. Keys are field names; TrainConfig fields live
// under "train." and the divergence under "train.divergence.". '#' starts a
// comment.
ExperimentConfig parse_config(const std::string& text);

// Reads the file and applies the FOGAN_SEED environment override.
ExperimentConfig load_config(const std::string& path);

std::string format_config(const ExperimentConfig& c);

}  // namespace fogan::eval
