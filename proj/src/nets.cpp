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

#include "fogan/nets.hpp"

#include <bit>
#include <cmath>
#include <fstream>

#include "fogan/error.hpp"
#include "fogan/rng.hpp"
#include "json.hpp"

namespace fogan {

using ad::Var;

std::string to_string(Activation a) {
  return a == Activation::Tanh ? "tanh" : "smooth-relu";
}

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "smooth-relu" || name == "smooth_relu") return Activation::SmoothRelu;
  throw ConfigError("unknown activation '" + name + "'");
}

Mlp::Mlp(std::vector<int> layer_sizes, Activation activation)
    : sizes_(std::move(layer_sizes)), activation_(activation) {
  if (sizes_.size() < 2) throw ShapeError("Mlp needs at least an input and an output layer");
  for (int s : sizes_) {
    if (s < 1) throw ShapeError("Mlp layer sizes must be positive");
  }
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const auto fan_in = static_cast<std::size_t>(sizes_[l]);
    const auto fan_out = static_cast<std::size_t>(sizes_[l + 1]);
    layout_.weight_offsets.push_back(off);
    off += fan_in * fan_out;
    layout_.bias_offsets.push_back(off);
    off += fan_out;
  }
  layout_.total = off;
  params_.assign(off, 0.0);
}

Mlp Mlp::init(std::vector<int> layer_sizes, Activation activation, InitScheme scheme,
              std::uint64_t seed) {
  Mlp net(std::move(layer_sizes), activation);
  if (scheme == InitScheme::Zeros) return net;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < net.sizes_.size(); ++l) {
    const int fan_in = net.sizes_[l];
    const int fan_out = net.sizes_[l + 1];
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    const std::size_t w0 = net.layout_.weight_offsets[l];
    for (std::size_t k = 0; k < static_cast<std::size_t>(fan_in * fan_out); ++k) {
      net.params_[w0 + k] = rng.uniform(-a, a);
    }
  }
  return net;
}

void Mlp::set_params(std::span<const double> p) {
  if (p.size() != params_.size()) throw ShapeError("Mlp::set_params: wrong parameter count");
  params_.assign(p.begin(), p.end());
}

std::vector<LayerParams> Mlp::unflatten() const {
  std::vector<LayerParams> layers;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const auto nw = static_cast<std::size_t>(sizes_[l] * sizes_[l + 1]);
    const auto nb = static_cast<std::size_t>(sizes_[l + 1]);
    const auto w = params_.begin() + static_cast<std::ptrdiff_t>(layout_.weight_offsets[l]);
    const auto b = params_.begin() + static_cast<std::ptrdiff_t>(layout_.bias_offsets[l]);
    layers.push_back(LayerParams{std::vector<double>(w, w + static_cast<std::ptrdiff_t>(nw)),
                                 std::vector<double>(b, b + static_cast<std::ptrdiff_t>(nb))});
  }
  return layers;
}

std::vector<double> Mlp::flatten(const std::vector<LayerParams>& layers) {
  std::vector<double> flat;
  for (const auto& layer : layers) {
    flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
    flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
  }
  return flat;
}

void Mlp::check_scalar_head() const {
  if (sizes_.back() != 1) throw UsageError("input gradient requires a scalar-output network");
}

std::vector<Var> Mlp::bind_constants(ad::Tape& tape) const {
  std::vector<Var> out;
  out.reserve(params_.size());
  for (double p : params_) out.push_back(tape.constant(p));
  return out;
}

std::vector<Var> Mlp::bind_variables(ad::Tape& tape) const { return tape.variables(params_); }

namespace {

Var activate(Var z, Activation act) {
  return act == Activation::Tanh ? ad::tanh(z) : ad::softplus(z, kSmoothReluBeta);
}

// Derivative of the activation given pre-activation z and output a.
Var activate_slope(Var z, Var a, Activation act) {
  if (act == Activation::Tanh) return 1.0 - a * a;
  return ad::sigmoid(z, kSmoothReluBeta);
}

double activate(double z, Activation act) {
  if (act == Activation::Tanh) return std::tanh(z);
  const double t = kSmoothReluBeta * z;
  return (t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t))) / kSmoothReluBeta;
}

double activate_slope(double z, double a, Activation act) {
  if (act == Activation::Tanh) return 1.0 - a * a;
  const double t = kSmoothReluBeta * z;
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

std::vector<Var> Mlp::forward(ad::Tape& tape, std::span<const Var> params,
                              std::span<const Var> x) const {
  if (x.size() != static_cast<std::size_t>(sizes_.front())) {
    throw ShapeError("Mlp::forward: input dimension mismatch");
  }
  if (params.size() != params_.size()) throw ShapeError("Mlp::forward: wrong parameter count");
  const Var one = tape.constant(1.0);
  std::vector<Var> h(x.begin(), x.end());
  std::vector<Var> ws;
  std::vector<Var> hs;
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto fan_in = static_cast<std::size_t>(sizes_[l]);
    const auto fan_out = static_cast<std::size_t>(sizes_[l + 1]);
    hs = h;
    hs.push_back(one);
    std::vector<Var> next;
    next.reserve(fan_out);
    for (std::size_t k = 0; k < fan_out; ++k) {
      const auto row = params.subspan(layout_.weight_offsets[l] + k * fan_in, fan_in);
      ws.assign(row.begin(), row.end());
      ws.push_back(params[layout_.bias_offsets[l] + k]);
      const Var z = ad::dot(ws, hs);
      next.push_back(l + 1 < layers ? activate(z, activation_) : z);
    }
    h = std::move(next);
  }
  return h;
}

Var Mlp::forward_scalar(ad::Tape& tape, std::span<const Var> params,
                        std::span<const Var> x) const {
  check_scalar_head();
  return forward(tape, params, x)[0];
}

Mlp::ValueAndGradient Mlp::value_and_input_gradient(ad::Tape& tape, std::span<const Var> params,
                                                    std::span<const Var> x) const {
  check_scalar_head();
  if (x.size() != static_cast<std::size_t>(sizes_.front())) {
    throw ShapeError("Mlp::forward: input dimension mismatch");
  }
  if (params.size() != params_.size()) throw ShapeError("Mlp::forward: wrong parameter count");
  const Var one = tape.constant(1.0);
  const std::size_t layers = sizes_.size() - 1;
  std::vector<std::vector<Var>> pre(layers);
  std::vector<std::vector<Var>> act(layers + 1);
  act[0].assign(x.begin(), x.end());
  std::vector<Var> ws;
  std::vector<Var> hs;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto fan_in = static_cast<std::size_t>(sizes_[l]);
    const auto fan_out = static_cast<std::size_t>(sizes_[l + 1]);
    hs = act[l];
    hs.push_back(one);
    for (std::size_t k = 0; k < fan_out; ++k) {
      const auto row = params.subspan(layout_.weight_offsets[l] + k * fan_in, fan_in);
      ws.assign(row.begin(), row.end());
      ws.push_back(params[layout_.bias_offsets[l] + k]);
      const Var z = ad::dot(ws, hs);
      pre[l].push_back(z);
      act[l + 1].push_back(l + 1 < layers ? activate(z, activation_) : z);
    }
  }

  // Backpropagate the unit seed at the scalar head to the input.
  std::vector<Var> upstream{one};
  std::vector<Var> delta;
  std::vector<Var> column;
  for (std::size_t l = layers; l-- > 0;) {
    const auto fan_in = static_cast<std::size_t>(sizes_[l]);
    const auto fan_out = static_cast<std::size_t>(sizes_[l + 1]);
    delta.clear();
    for (std::size_t k = 0; k < fan_out; ++k) {
      delta.push_back(l + 1 < layers
                          ? upstream[k] * activate_slope(pre[l][k], act[l + 1][k], activation_)
                          : upstream[k]);
    }
    std::vector<Var> below;
    below.reserve(fan_in);
    for (std::size_t j = 0; j < fan_in; ++j) {
      column.clear();
      for (std::size_t k = 0; k < fan_out; ++k) {
        column.push_back(params[layout_.weight_offsets[l] + k * fan_in + j]);
      }
      below.push_back(ad::dot(column, delta));
    }
    upstream = std::move(below);
  }
  return ValueAndGradient{act[layers][0], std::move(upstream)};
}

ad::Gradient Mlp::input_gradient(ad::Tape& tape, std::span<const Var> params,
                                 std::span<const Var> x) const {
  auto vg = value_and_input_gradient(tape, params, x);
  ad::Gradient g;
  for (const Var& v : x) g.ids.push_back(v.index);
  g.nodes = std::move(vg.gradient);
  return g;
}

std::vector<double> Mlp::forward_values(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(sizes_.front())) {
    throw ShapeError("Mlp::forward: input dimension mismatch");
  }
  std::vector<double> h(x.begin(), x.end());
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto fan_in = static_cast<std::size_t>(sizes_[l]);
    const auto fan_out = static_cast<std::size_t>(sizes_[l + 1]);
    std::vector<double> next(fan_out);
    for (std::size_t k = 0; k < fan_out; ++k) {
      const double* w = params_.data() + layout_.weight_offsets[l] + k * fan_in;
      double z = params_[layout_.bias_offsets[l] + k];
      for (std::size_t j = 0; j < fan_in; ++j) z += w[j] * h[j];
      next[k] = l + 1 < layers ? activate(z, activation_) : z;
    }
    h = std::move(next);
  }
  return h;
}

double Mlp::value(std::span<const double> x) const {
  check_scalar_head();
  return forward_values(x)[0];
}

std::vector<double> Mlp::input_gradient_values(std::span<const double> x) const {
  check_scalar_head();
  if (x.size() != static_cast<std::size_t>(sizes_.front())) {
    throw ShapeError("Mlp::forward: input dimension mismatch");
  }
  const std::size_t layers = sizes_.size() - 1;
  std::vector<std::vector<double>> pre(layers);
  std::vector<std::vector<double>> act(layers + 1);
  act[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers; ++l) {
    const auto fan_in = static_cast<std::size_t>(sizes_[l]);
    const auto fan_out = static_cast<std::size_t>(sizes_[l + 1]);
    for (std::size_t k = 0; k < fan_out; ++k) {
      const double* w = params_.data() + layout_.weight_offsets[l] + k * fan_in;
      double z = params_[layout_.bias_offsets[l] + k];
      for (std::size_t j = 0; j < fan_in; ++j) z += w[j] * act[l][j];
      pre[l].push_back(z);
      act[l + 1].push_back(l + 1 < layers ? activate(z, activation_) : z);
    }
  }
  std::vector<double> upstream{1.0};
  for (std::size_t l = layers; l-- > 0;) {
    const auto fan_in = static_cast<std::size_t>(sizes_[l]);
    const auto fan_out = static_cast<std::size_t>(sizes_[l + 1]);
    std::vector<double> below(fan_in, 0.0);
    for (std::size_t k = 0; k < fan_out; ++k) {
      const double d = l + 1 < layers
                           ? upstream[k] * activate_slope(pre[l][k], act[l + 1][k], activation_)
                           : upstream[k];
      const double* w = params_.data() + layout_.weight_offsets[l] + k * fan_in;
      for (std::size_t j = 0; j < fan_in; ++j) below[j] += w[j] * d;
    }
    upstream = std::move(below);
  }
  return upstream;
}

void Mlp::save_checkpoint(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open checkpoint for writing: " + path);
  nlohmann::json header;
  header["layer_sizes"] = sizes_;
  header["activation"] = to_string(activation_);
  header["count"] = params_.size();
  out << header.dump() << '\n';
  for (double v : params_) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int k = 0; k < 8; ++k) {
      bytes[k] = static_cast<char>(bits & 0xffu);
      bits >>= 8;
    }
    out.write(bytes, 8);
  }
  if (!out) throw Error("failed writing checkpoint: " + path);
}

Mlp Mlp::load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path);
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad checkpoint header: ") + e.what());
  }
  Mlp net(header.at("layer_sizes").get<std::vector<int>>(),
          parse_activation(header.at("activation").get<std::string>()));
  const auto count = header.at("count").get<std::size_t>();
  if (count != net.param_count()) throw ShapeError("checkpoint count does not match layer sizes");
  for (std::size_t i = 0; i < count; ++i) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (!in) throw Error("truncated checkpoint: " + path);
    std::uint64_t bits = 0;
    for (int k = 7; k >= 0; --k) bits = (bits << 8) | bytes[k];
    net.params_[i] = std::bit_cast<double>(bits);
  }
  return net;
}

}  // namespace fogan
