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
#include <span>
#include <string>
#include <vector>

#include "fogan/autodiff.hpp"

namespace fogan {

enum class Activation { Tanh, SmoothRelu };

// Sharpness of the softplus used as smooth-relu.
inline constexpr double kSmoothReluBeta = 10.0;

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

enum class InitScheme { Zeros, UniformScaled };

// Weights of one dense layer, row-major [fan_out x fan_in].
struct LayerParams {
  std::vector<double> weights;
  std::vector<double> bias;
};

// Offsets of each layer's block in the flat parameter vector. Each block is
// the weight matrix followed by the bias.
struct ParamLayout {
  std::vector<std::size_t> weight_offsets;
  std::vector<std::size_t> bias_offsets;
  std::size_t total = 0;
};

// Dense network with a linear last layer. Hidden layers use `activation`.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> layer_sizes, Activation activation);

  static Mlp init(std::vector<int> layer_sizes, Activation activation, InitScheme scheme,
                  std::uint64_t seed);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  Activation activation() const { return activation_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  std::size_t param_count() const { return layout_.total; }
  const ParamLayout& layout() const { return layout_; }

  const std::vector<double>& params() const { return params_; }
  void set_params(std::span<const double> p);

  std::vector<LayerParams> unflatten() const;
  static std::vector<double> flatten(const std::vector<LayerParams>& layers);

  // Forward pass on a tape with parameters supplied as nodes (variables when
  // training, constants when frozen).
  std::vector<ad::Var> forward(ad::Tape& tape, std::span<const ad::Var> params,
                               std::span<const ad::Var> x) const;
  ad::Var forward_scalar(ad::Tape& tape, std::span<const ad::Var> params,
                         std::span<const ad::Var> x) const;

  // Forward value together with the exact input gradient, both built as
  // nodes so that they can be differentiated with respect to params.
  struct ValueAndGradient {
    ad::Var value;
    std::vector<ad::Var> gradient;
  };
  ValueAndGradient value_and_input_gradient(ad::Tape& tape, std::span<const ad::Var> params,
                                            std::span<const ad::Var> x) const;

  ad::Gradient input_gradient(ad::Tape& tape, std::span<const ad::Var> params,
                              std::span<const ad::Var> x) const;

  // Plain numeric evaluation without a tape.
  std::vector<double> forward_values(std::span<const double> x) const;
  double value(std::span<const double> x) const;
  std::vector<double> input_gradient_values(std::span<const double> x) const;

  // Parameters as constant nodes on a tape.
  std::vector<ad::Var> bind_constants(ad::Tape& tape) const;
  std::vector<ad::Var> bind_variables(ad::Tape& tape) const;

  void save_checkpoint(const std::string& path) const;
  static Mlp load_checkpoint(const std::string& path);

 private:
  void check_scalar_head() const;

  std::vector<int> sizes_;
  Activation activation_ = Activation::Tanh;
  ParamLayout layout_;
  std::vector<double> params_;
};

}  // namespace fogan
