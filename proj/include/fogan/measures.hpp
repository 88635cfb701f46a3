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
#include <optional>
#include <span>
#include <vector>

#include "fogan/autodiff.hpp"
#include "fogan/nets.hpp"
#include "fogan/rng.hpp"

namespace fogan {

using Point = std::vector<double>;

// Floor applied to every distance that ends up in a denominator.
inline constexpr double kDistanceFloor = 1e-9;

// Weighted finite point set in R^n.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  // Equal weights.
  explicit EmpiricalMeasure(std::vector<Point> points);
  EmpiricalMeasure(std::vector<Point> points, std::vector<double> weights);

  static EmpiricalMeasure dirac(Point at);
  // One-dimensional convenience constructor.
  static EmpiricalMeasure from_scalars(std::span<const double> xs);

  std::size_t size() const { return points_.size(); }
  int dim() const { return dim_; }
  const std::vector<Point>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  const Point& point(std::size_t i) const { return points_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  Point mean() const;

 private:
  std::vector<Point> points_;
  std::vector<double> weights_;
  int dim_ = 0;
};

enum class LatentKind { UnitCube, SymmetricCube };  // U([0,1]^d), U([-1,1]^d)

struct LatentSpec {
  LatentKind kind = LatentKind::UnitCube;
  int dim = 1;

  Point draw(Rng& rng) const;
};

enum class GeneratorKind { DiracLocation, UniformInterval, AffinePushforward, NetworkPushforward };

// How a network generator's raw output is read.
enum class NetworkHead { Linear, RowSoftmax };

// Parameterized pushforward g(theta, z).
//   DiracLocation:     g = theta (theta in R^n, latent ignored)
//   UniformInterval:   g = theta * z, z ~ U([0,1]), theta > 0
//   AffinePushforward: g = W z + b, theta = [W row-major (n x d), b]
//   NetworkPushforward: g = net(theta; z), optionally with a softmax applied
//                       to consecutive rows of `softmax_row` outputs.
class GeneratorFamily {
 public:
  static GeneratorFamily dirac(Point location);
  static GeneratorFamily uniform_interval(double theta);
  static GeneratorFamily affine(int out_dim, LatentSpec latent, std::vector<double> theta);
  static GeneratorFamily network(Mlp net, LatentSpec latent, NetworkHead head = NetworkHead::Linear,
                                 int softmax_row = 0);

  GeneratorKind kind() const { return kind_; }
  const std::vector<double>& theta() const { return theta_; }
  void set_theta(std::span<const double> theta);
  const LatentSpec& latent() const { return latent_; }
  int output_dim() const { return out_dim_; }
  const Mlp& net() const { return net_; }
  NetworkHead head() const { return head_; }
  int softmax_row() const { return softmax_row_; }

  // Throws DomainError when theta leaves the family's domain.
  void validate() const;

  Point draw_latent(Rng& rng) const;
  Point push_values(std::span<const double> z) const;
  // g(theta, z) on a tape with theta supplied as nodes.
  std::vector<ad::Var> push(ad::Tape& tape, std::span<const ad::Var> theta,
                            std::span<const double> z) const;

 private:
  GeneratorKind kind_ = GeneratorKind::DiracLocation;
  std::vector<double> theta_;
  LatentSpec latent_;
  int out_dim_ = 1;
  Mlp net_;
  NetworkHead head_ = NetworkHead::Linear;
  int softmax_row_ = 0;
};

struct StretchSpec {
  double epsilon = 0.1;
  void validate() const;
};

EmpiricalMeasure sample(const GeneratorFamily& family, std::size_t count, std::uint64_t seed);

// Points x' - alpha (x' - x) with x ~ p, x' ~ q, alpha ~ U([0, eps]).
EmpiricalMeasure stretch_sample(const EmpiricalMeasure& p, const EmpiricalMeasure& q,
                                const StretchSpec& spec, std::size_t count, std::uint64_t seed);

// Draws an index from a measure's weights.
std::size_t draw_index(const EmpiricalMeasure& m, Rng& rng);

// Row-major |p| x |q| matrix of Euclidean distances.
struct DistanceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

DistanceMatrix pairwise_distances(const EmpiricalMeasure& p, const EmpiricalMeasure& q);

double euclidean(std::span<const double> a, std::span<const double> b);

}  // namespace fogan
