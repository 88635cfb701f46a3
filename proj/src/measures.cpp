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

#include "fogan/measures.hpp"

#include <cmath>
#include <string>

#include "fogan/error.hpp"

namespace fogan {

using ad::Var;

namespace {

int checked_dim(const std::vector<Point>& points) {
  if (points.empty()) throw ShapeError("measure needs at least one point");
  const std::size_t n = points.front().size();
  if (n < 1) throw ShapeError("points must have dimension >= 1");
  for (const auto& p : points) {
    if (p.size() != n) throw ShapeError("points of a measure must share one dimension");
    for (double c : p) {
      if (!std::isfinite(c)) throw NumericError("measure point has a non-finite coordinate");
    }
  }
  return static_cast<int>(n);
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(std::vector<Point> points)
    : points_(std::move(points)), dim_(checked_dim(points_)) {
  weights_.assign(points_.size(), 1.0 / static_cast<double>(points_.size()));
}

EmpiricalMeasure::EmpiricalMeasure(std::vector<Point> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)), dim_(checked_dim(points_)) {
  if (weights_.size() != points_.size()) throw ShapeError("one weight per point required");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("weights must be finite and >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("weights must sum to 1, got " + std::to_string(total));
  }
}

EmpiricalMeasure EmpiricalMeasure::dirac(Point at) {
  return EmpiricalMeasure(std::vector<Point>{std::move(at)});
}

EmpiricalMeasure EmpiricalMeasure::from_scalars(std::span<const double> xs) {
  std::vector<Point> pts;
  pts.reserve(xs.size());
  for (double x : xs) pts.push_back(Point{x});
  return EmpiricalMeasure(std::move(pts));
}

Point EmpiricalMeasure::mean() const {
  Point m(static_cast<std::size_t>(dim_), 0.0);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    for (std::size_t k = 0; k < m.size(); ++k) m[k] += weights_[i] * points_[i][k];
  }
  return m;
}

Point LatentSpec::draw(Rng& rng) const {
  Point z(static_cast<std::size_t>(dim));
  for (auto& c : z) c = kind == LatentKind::UnitCube ? rng.uniform() : rng.uniform(-1.0, 1.0);
  return z;
}

GeneratorFamily GeneratorFamily::dirac(Point location) {
  if (location.empty()) throw ShapeError("Dirac location needs dimension >= 1");
  GeneratorFamily g;
  g.kind_ = GeneratorKind::DiracLocation;
  g.out_dim_ = static_cast<int>(location.size());
  g.theta_ = std::move(location);
  g.latent_ = LatentSpec{LatentKind::UnitCube, 1};
  return g;
}

GeneratorFamily GeneratorFamily::uniform_interval(double theta) {
  GeneratorFamily g;
  g.kind_ = GeneratorKind::UniformInterval;
  g.theta_ = {theta};
  g.latent_ = LatentSpec{LatentKind::UnitCube, 1};
  g.out_dim_ = 1;
  g.validate();
  return g;
}

GeneratorFamily GeneratorFamily::affine(int out_dim, LatentSpec latent, std::vector<double> theta) {
  if (out_dim < 1 || latent.dim < 1) throw ShapeError("affine family needs positive dimensions");
  const auto expected = static_cast<std::size_t>(out_dim * latent.dim + out_dim);
  if (theta.size() != expected) throw ShapeError("affine theta must hold W (n x d) and b (n)");
  GeneratorFamily g;
  g.kind_ = GeneratorKind::AffinePushforward;
  g.out_dim_ = out_dim;
  g.latent_ = latent;
  g.theta_ = std::move(theta);
  return g;
}

GeneratorFamily GeneratorFamily::network(Mlp net, LatentSpec latent, NetworkHead head,
                                         int softmax_row) {
  if (net.input_dim() != latent.dim) throw ShapeError("network input must match latent dim");
  if (head == NetworkHead::RowSoftmax &&
      (softmax_row < 1 || net.output_dim() % softmax_row != 0)) {
    throw ShapeError("softmax row length must divide the network output");
  }
  GeneratorFamily g;
  g.kind_ = GeneratorKind::NetworkPushforward;
  g.out_dim_ = net.output_dim();
  g.latent_ = latent;
  g.theta_ = net.params();
  g.net_ = std::move(net);
  g.head_ = head;
  g.softmax_row_ = softmax_row;
  return g;
}

void GeneratorFamily::set_theta(std::span<const double> theta) {
  if (theta.size() != theta_.size()) throw ShapeError("theta has the wrong length");
  theta_.assign(theta.begin(), theta.end());
  if (kind_ == GeneratorKind::NetworkPushforward) net_.set_params(theta);
}

void GeneratorFamily::validate() const {
  for (double t : theta_) {
    if (!std::isfinite(t)) throw DomainError("theta has a non-finite entry");
  }
  if (kind_ == GeneratorKind::UniformInterval && !(theta_[0] > 0.0)) {
    throw DomainError("UniformInterval requires theta > 0");
  }
}

Point GeneratorFamily::draw_latent(Rng& rng) const {
  if (kind_ == GeneratorKind::DiracLocation) return {};
  return latent_.draw(rng);
}

namespace {

std::vector<Var> row_softmax(ad::Tape& tape, const std::vector<Var>& logits, int row) {
  std::vector<Var> out;
  out.reserve(logits.size());
  std::vector<Var> exps(static_cast<std::size_t>(row));
  for (std::size_t r0 = 0; r0 < logits.size(); r0 += static_cast<std::size_t>(row)) {
    double shift = logits[r0].value();
    for (int k = 1; k < row; ++k) shift = std::max(shift, logits[r0 + static_cast<std::size_t>(k)].value());
    for (int k = 0; k < row; ++k) {
      exps[static_cast<std::size_t>(k)] = ad::exp(logits[r0 + static_cast<std::size_t>(k)] - shift);
    }
    const Var inv = ad::reciprocal(tape.nary_sum(exps));
    for (const Var& e : exps) out.push_back(e * inv);
  }
  return out;
}

void row_softmax(std::vector<double>& v, int row) {
  for (std::size_t r0 = 0; r0 < v.size(); r0 += static_cast<std::size_t>(row)) {
    double shift = v[r0];
    for (int k = 1; k < row; ++k) shift = std::max(shift, v[r0 + static_cast<std::size_t>(k)]);
    double total = 0.0;
    for (int k = 0; k < row; ++k) {
      auto& e = v[r0 + static_cast<std::size_t>(k)];
      e = std::exp(e - shift);
      total += e;
    }
    for (int k = 0; k < row; ++k) v[r0 + static_cast<std::size_t>(k)] /= total;
  }
}

}  // namespace

Point GeneratorFamily::push_values(std::span<const double> z) const {
  switch (kind_) {
    case GeneratorKind::DiracLocation:
      return theta_;
    case GeneratorKind::UniformInterval:
      return Point{theta_[0] * z[0]};
    case GeneratorKind::AffinePushforward: {
      const auto d = static_cast<std::size_t>(latent_.dim);
      Point out(static_cast<std::size_t>(out_dim_));
      for (std::size_t r = 0; r < out.size(); ++r) {
        double acc = theta_[out.size() * d + r];
        for (std::size_t c = 0; c < d; ++c) acc += theta_[r * d + c] * z[c];
        out[r] = acc;
      }
      return out;
    }
    case GeneratorKind::NetworkPushforward: {
      auto out = net_.forward_values(z);
      if (head_ == NetworkHead::RowSoftmax) row_softmax(out, softmax_row_);
      return out;
    }
  }
  throw UsageError("unknown generator kind");
}

std::vector<Var> GeneratorFamily::push(ad::Tape& tape, std::span<const Var> theta,
                                       std::span<const double> z) const {
  if (theta.size() != theta_.size()) throw ShapeError("theta has the wrong length");
  switch (kind_) {
    case GeneratorKind::DiracLocation:
      return std::vector<Var>(theta.begin(), theta.end());
    case GeneratorKind::UniformInterval:
      return {theta[0] * z[0]};
    case GeneratorKind::AffinePushforward: {
      const auto d = static_cast<std::size_t>(latent_.dim);
      const auto n = static_cast<std::size_t>(out_dim_);
      std::vector<Var> zs;
      for (double c : z) zs.push_back(tape.constant(c));
      std::vector<Var> out;
      for (std::size_t r = 0; r < n; ++r) {
        out.push_back(ad::dot(theta.subspan(r * d, d), zs) + theta[n * d + r]);
      }
      return out;
    }
    case GeneratorKind::NetworkPushforward: {
      std::vector<Var> zs;
      for (double c : z) zs.push_back(tape.constant(c));
      auto out = net_.forward(tape, theta, zs);
      if (head_ == NetworkHead::RowSoftmax) return row_softmax(tape, out, softmax_row_);
      return out;
    }
  }
  throw UsageError("unknown generator kind");
}

void StretchSpec::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DomainError("stretch epsilon must lie in (0, 1]");
}

EmpiricalMeasure sample(const GeneratorFamily& family, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw UsageError("sample count must be >= 1");
  family.validate();
  Rng rng(seed);
  std::vector<Point> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) pts.push_back(family.push_values(family.draw_latent(rng)));
  return EmpiricalMeasure(std::move(pts));
}

std::size_t draw_index(const EmpiricalMeasure& m, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    acc += m.weight(i);
    if (u < acc) return i;
  }
  return m.size() - 1;
}

EmpiricalMeasure stretch_sample(const EmpiricalMeasure& p, const EmpiricalMeasure& q,
                                const StretchSpec& spec, std::size_t count, std::uint64_t seed) {
  spec.validate();
  if (p.dim() != q.dim()) throw ShapeError("stretch_sample: dimension mismatch");
  if (count < 1) throw UsageError("sample count must be >= 1");
  Rng rng(seed);
  std::vector<Point> pts;
  pts.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const Point& x = p.point(draw_index(p, rng));
    const Point& xq = q.point(draw_index(q, rng));
    const double alpha = rng.uniform(0.0, spec.epsilon);
    Point out(xq.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = xq[k] - alpha * (xq[k] - x[k]);
    pts.push_back(std::move(out));
  }
  return EmpiricalMeasure(std::move(pts));
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("euclidean: dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

DistanceMatrix pairwise_distances(const EmpiricalMeasure& p, const EmpiricalMeasure& q) {
  if (p.dim() != q.dim()) throw ShapeError("pairwise_distances: dimension mismatch");
  DistanceMatrix m{p.size(), q.size(), std::vector<double>(p.size() * q.size())};
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) m.data[i * q.size() + j] = euclidean(p.point(i), q.point(j));
  }
  return m;
}

}  // namespace fogan
