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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "fogan/error.hpp"
#include "fogan/measures.hpp"

using namespace fogan;

namespace {

double mean0(const EmpiricalMeasure& m) { return m.mean()[0]; }

}  // namespace

TEST_CASE("measure construction validates its inputs") {
  CHECK_THROWS_AS(EmpiricalMeasure(std::vector<Point>{}), ShapeError);
  CHECK_THROWS_AS(EmpiricalMeasure(std::vector<Point>{{0.0}, {1.0, 2.0}}), ShapeError);
  CHECK_THROWS_AS(EmpiricalMeasure(std::vector<Point>{{NAN}}), NumericError);
  CHECK_THROWS_AS(EmpiricalMeasure({{0.0}, {1.0}}, {0.5, 0.4}), DomainError);
  CHECK_THROWS_AS(EmpiricalMeasure({{0.0}, {1.0}}, {1.5, -0.5}), DomainError);
  CHECK_NOTHROW(EmpiricalMeasure({{0.0}, {1.0}}, {0.25, 0.75}));

  const EmpiricalMeasure m({{1.0, 2.0}, {3.0, 4.0}}, {0.25, 0.75});
  CHECK(m.dim() == 2);
  CHECK(m.mean()[0] == doctest::Approx(2.5));
  CHECK(m.mean()[1] == doctest::Approx(3.5));
}

TEST_CASE("Dirac family samples are exact copies of theta") {
  const auto s = sample(GeneratorFamily::dirac({0.5}), 3, 11);
  REQUIRE(s.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(s.point(i)[0] == 0.5);
    CHECK(s.weight(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
}

TEST_CASE("uniform interval sample mean") {
  const std::size_t n = 100000;
  const auto s = sample(GeneratorFamily::uniform_interval(2.0), n, 5);
  const double sigma = std::sqrt(4.0 / 12.0 / static_cast<double>(n));
  CHECK(std::abs(mean0(s) - 1.0) < 3.0 * sigma);
  for (const auto& p : s.points()) {
    CHECK(p[0] >= 0.0);
    CHECK(p[0] <= 2.0);
  }
}

TEST_CASE("affine pushforward sample mean") {
  const std::size_t n = 100000;
  const auto fam = GeneratorFamily::affine(1, LatentSpec{LatentKind::UnitCube, 1}, {2.0, 1.0});
  const auto s = sample(fam, n, 17);
  // 2 z + 1 with z ~ U([0,1]): mean 2, variance 4/12.
  const double sigma = std::sqrt(4.0 / 12.0 / static_cast<double>(n));
  CHECK(std::abs(mean0(s) - 2.0) < 3.0 * sigma);
}

TEST_CASE("invalid theta is a domain error") {
  CHECK_THROWS_AS(GeneratorFamily::uniform_interval(0.0), DomainError);
  CHECK_THROWS_AS(GeneratorFamily::uniform_interval(-1.0), DomainError);
  auto fam = GeneratorFamily::uniform_interval(1.0);
  const std::vector<double> bad{-0.5};
  fam.set_theta(bad);
  CHECK_THROWS_AS(sample(fam, 4, 1), DomainError);
  CHECK_THROWS_AS(sample(GeneratorFamily::dirac({0.0}), 0, 1), UsageError);
}

TEST_CASE("sampling is deterministic per seed") {
  const auto net = Mlp::init({2, 8, 3}, Activation::Tanh, InitScheme::UniformScaled, 3);
  const auto fam = GeneratorFamily::network(net, LatentSpec{LatentKind::SymmetricCube, 2});
  const auto a = sample(fam, 50, 99);
  const auto b = sample(fam, 50, 99);
  const auto c = sample(fam, 50, 100);
  CHECK(a.points() == b.points());
  CHECK(a.points() != c.points());
}

TEST_CASE("network pushforward with row softmax produces distributions") {
  const auto net = Mlp::init({3, 8, 6}, Activation::SmoothRelu, InitScheme::UniformScaled, 4);
  const auto fam =
      GeneratorFamily::network(net, LatentSpec{LatentKind::UnitCube, 3}, NetworkHead::RowSoftmax, 3);
  const auto s = sample(fam, 20, 8);
  for (const auto& p : s.points()) {
    REQUIRE(p.size() == 6);
    CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p[3] + p[4] + p[5] == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("push on a tape agrees with push_values") {
  const auto net = Mlp::init({2, 5, 2}, Activation::Tanh, InitScheme::UniformScaled, 21);
  const auto fam = GeneratorFamily::network(net, LatentSpec{LatentKind::SymmetricCube, 2});
  ad::Tape tape;
  const auto theta = tape.variables(fam.theta());
  const Point z{0.3, -0.7};
  const auto x = fam.push(tape, theta, z);
  const auto v = fam.push_values(z);
  REQUIRE(x.size() == v.size());
  for (std::size_t k = 0; k < v.size(); ++k) CHECK(x[k].value() == doctest::Approx(v[k]).epsilon(1e-15));
}

TEST_CASE("stretch sample bounds and mean") {
  const auto p = EmpiricalMeasure::dirac({0.0});
  const auto q = EmpiricalMeasure::dirac({1.0});
  const std::size_t n = 100000;
  const auto s = stretch_sample(p, q, StretchSpec{0.5}, n, 77);
  for (const auto& x : s.points()) {
    CHECK(x[0] >= 0.5);
    CHECK(x[0] <= 1.0);
  }
  // 1 - alpha with alpha ~ U([0, 0.5]): mean 1 - eps/2.
  const double sigma = std::sqrt(0.25 / 12.0 / static_cast<double>(n));
  CHECK(std::abs(mean0(s) - 0.75) < 3.0 * sigma);
}

TEST_CASE("small epsilon recovers the q points") {
  const auto p = EmpiricalMeasure::from_scalars(std::vector<double>{-3.0, -2.0});
  const auto q = EmpiricalMeasure::from_scalars(std::vector<double>{1.0, 2.0, 4.0});
  const auto s = stretch_sample(p, q, StretchSpec{1e-12}, 200, 3);
  for (const auto& x : s.points()) {
    double best = 1e9;
    for (const auto& y : q.points()) best = std::min(best, std::abs(x[0] - y[0]));
    CHECK(best < 1e-10);
  }
}

TEST_CASE("stretched points lie on their segments in higher dimension") {
  Rng rng(4);
  std::vector<Point> pp;
  std::vector<Point> qq;
  for (int i = 0; i < 6; ++i) pp.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
  for (int i = 0; i < 5; ++i) qq.push_back({3.0 + rng.uniform(), rng.uniform(), rng.uniform()});
  const EmpiricalMeasure p(pp);
  const EmpiricalMeasure q(qq);
  const auto s = stretch_sample(p, q, StretchSpec{1.0}, 500, 12);
  // Convex hull of the union is inside this bounding box.
  for (const auto& x : s.points()) {
    CHECK(x[0] >= 0.0);
    CHECK(x[0] <= 4.0);
    CHECK(x[1] >= 0.0);
    CHECK(x[1] <= 1.0);
  }
}

TEST_CASE("stretch spec and dimension checks") {
  CHECK_THROWS_AS(StretchSpec{0.0}.validate(), DomainError);
  CHECK_THROWS_AS(StretchSpec{1.5}.validate(), DomainError);
  CHECK_NOTHROW(StretchSpec{1.0}.validate());
  const auto p = EmpiricalMeasure::dirac({0.0});
  const auto q = EmpiricalMeasure::dirac({1.0, 1.0});
  CHECK_THROWS_AS(stretch_sample(p, q, StretchSpec{0.1}, 5, 1), ShapeError);
  CHECK_THROWS_AS(pairwise_distances(p, q), ShapeError);
}

TEST_CASE("pairwise distances") {
  const auto z = EmpiricalMeasure::dirac({0.0});
  CHECK(pairwise_distances(z, z)(0, 0) == 0.0);
  const auto a = EmpiricalMeasure::dirac({0.0, 0.0});
  const auto b = EmpiricalMeasure::dirac({3.0, 4.0});
  CHECK(pairwise_distances(a, b)(0, 0) == doctest::Approx(5.0).epsilon(1e-15));

  Rng rng(8);
  std::vector<Point> pp(4, Point(3));
  std::vector<Point> qq(5, Point(3));
  for (auto& x : pp) {
    for (auto& c : x) c = rng.normal();
  }
  for (auto& x : qq) {
    for (auto& c : x) c = rng.normal();
  }
  const EmpiricalMeasure p(pp);
  const EmpiricalMeasure q(qq);
  const auto d = pairwise_distances(p, q);
  const auto dt = pairwise_distances(q, p);
  REQUIRE(d.rows == 4);
  REQUIRE(d.cols == 5);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += (pp[i][k] - qq[j][k]) * (pp[i][k] - qq[j][k]);
      CHECK(d(i, j) == doctest::Approx(std::sqrt(s)).epsilon(1e-15));
      CHECK(d(i, j) == dt(j, i));
    }
  }
}

TEST_CASE("draw_index follows the weights") {
  const EmpiricalMeasure m({{0.0}, {1.0}, {2.0}}, {0.2, 0.0, 0.8});
  Rng rng(1);
  int counts[3] = {0, 0, 0};
  const int n = 50000;
  for (int k = 0; k < n; ++k) counts[draw_index(m, rng)]++;
  CHECK(counts[1] == 0);
  CHECK(std::abs(counts[0] / static_cast<double>(n) - 0.2) < 0.01);
}
