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
#include "fogan/autodiff.hpp"
#include "fogan/error.hpp"
#include "fogan/rng.hpp"

using namespace fogan;
using namespace fogan::ad;

namespace {

// Loss touching every operation of the engine.
Var every_op(Tape& t, std::span<const Var> v) {
  const Var x = v[0];
  const Var y = v[1];
  const Var z = v[2];
  Var acc = x * y - z / (1.5 + y * y);
  acc += exp(0.3 * x) + log(2.0 + z * z) + tanh(y) + sigmoid(x, 2.0) + softplus(z, 10.0);
  acc += pow(1.0 + x * x, 1.7) + sqrt(3.0 + y) + max(x, -5.0) - (-z);
  acc += 4.0 - reciprocal(2.0 + x * x);
  const std::vector<Var> us{x, y, z};
  const std::vector<Var> ws{y, z, t.constant(0.25)};
  acc += dot(us, ws) + sum(us) + x * y * z;
  return acc;
}

}  // namespace

TEST_CASE("polynomial derivatives") {
  Tape t;
  const Var x = t.variable(3.0);
  const std::vector<Var> wrt{x};
  CHECK(grad(x * x, wrt).value(0) == doctest::Approx(6.0).epsilon(1e-15));

  Tape u;
  const Var h = u.variable(0.5);
  const Var f = h * (-4.0 * h * h + 4.0 * h - 2.0);
  const std::vector<Var> hw{h};
  CHECK(grad(f, hw).value(0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(grad_values(f, hw)[0] == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("squared input gradient differentiated in a second variable") {
  // g(x, y) = |d/dx x^3 y|^2 = 9 x^4 y^2, so dg/dy = 18 x^4 y = 36 at (1, 2).
  auto g = [](Tape& t, std::span<const Var> v) {
    (void)t;
    const Var f = v[0] * v[0] * v[0] * v[1];
    const std::vector<Var> wx{v[0]};
    const Var dfdx = grad(f, wx)[0];
    return dfdx * dfdx;
  };
  Tape t;
  const auto v = t.variables(std::vector<double>{1.0, 2.0});
  const Var out = g(t, v);
  const std::vector<Var> wy{v[1]};
  const double dgdy = grad_values(out, wy)[0];
  CHECK(dgdy == doctest::Approx(36.0).epsilon(1e-14));
  CHECK(finite_difference_check(g, std::vector<double>{1.0, 2.0}, 1e-5) < 1e-6);
}

TEST_CASE("finite difference check on a quadratic") {
  auto quad = [](Tape& t, std::span<const Var> v) {
    (void)t;
    return 3.0 * v[0] * v[0] - 2.0 * v[0] * v[1] + 0.5 * v[1] * v[1] + v[0] - 7.0;
  };
  CHECK(finite_difference_check(quad, std::vector<double>{0.3, -1.2}, 1e-5) < 1e-9);
  CHECK(finite_difference_check(quad, std::vector<double>{12.0, 4.0}, 1e-5) < 1e-9);
}

TEST_CASE("every operation matches central differences") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> at{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    CHECK(finite_difference_check(every_op, at, 1e-5) < 1e-7);
  }
}

TEST_CASE("numeric and retaped reverse passes agree") {
  Tape t;
  const auto v = t.variables(std::vector<double>{0.2, -0.4, 0.9});
  const Var out = every_op(t, v);
  const auto numeric = grad_values(out, v);
  const auto taped = grad(out, v).values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(taped[i] == doctest::Approx(numeric[i]).epsilon(1e-14));
  }
}

TEST_CASE("nested gradients match second-order central differences") {
  Rng rng(5);
  const double h = 1e-4;
  auto value_at = [&](double x, double y, double z) {
    Tape t;
    const auto v = t.variables(std::vector<double>{x, y, z});
    return every_op(t, v).value();
  };
  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<double> p{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    Tape t;
    const auto v = t.variables(p);
    const Var out = every_op(t, v);
    const Gradient g1 = grad(out, v);
    for (std::size_t i = 0; i < 3; ++i) {
      const auto row = grad_values(g1[i], v);
      for (std::size_t j = 0; j < 3; ++j) {
        auto shifted = [&](double si, double sj) {
          std::vector<double> q = p;
          q[i] += si;
          q[j] += sj;
          return value_at(q[0], q[1], q[2]);
        };
        const double fd =
            (shifted(h, h) - shifted(h, -h) - shifted(-h, h) + shifted(-h, -h)) / (4 * h * h);
        const double rel = std::abs(fd - row[j]) / std::max({std::abs(fd), std::abs(row[j]), 1e-8});
        CHECK(rel < 1e-3);
      }
    }
  }
}

TEST_CASE("third derivative through three retaped passes") {
  Tape t;
  const Var x = t.variable(0.7);
  const std::vector<Var> w{x};
  const Var f = tanh(x);
  const Var d1 = grad(f, w)[0];
  const Var d2 = grad(d1, w)[0];
  const Var d3 = grad(d2, w)[0];
  const double th = std::tanh(0.7);
  const double s2 = 1 - th * th;
  CHECK(d1.value() == doctest::Approx(s2));
  CHECK(d2.value() == doctest::Approx(-2 * th * s2));
  CHECK(d3.value() == doctest::Approx(-2 * s2 * s2 + 4 * th * th * s2));
}

TEST_CASE("linearity on a shared graph") {
  Tape t;
  const auto v = t.variables(std::vector<double>{0.3, 0.8, -0.6});
  const Var f = every_op(t, v);
  const Var g = v[0] * tanh(v[1]) + exp(v[2]) * v[0];
  const double a = 0.37;
  const double b = -1.9;
  const auto gf = grad_values(f, v);
  const auto gg = grad_values(g, v);
  const auto combined = grad_values(a * f + b * g, v);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double expect = a * gf[i] + b * gg[i];
    CHECK(std::abs(combined[i] - expect) <= 4e-16 * (std::abs(a * gf[i]) + std::abs(b * gg[i])));
  }
}

TEST_CASE("variables absent from the graph get an exact zero") {
  Tape t;
  const Var x = t.variable(1.0);
  const Var y = t.variable(2.0);
  const Var f = exp(x) * 3.0;
  const std::vector<Var> wrt{y, x};
  const Gradient g = grad(f, wrt);
  CHECK(g.value(0) == 0.0);
  CHECK(g.value(1) == doctest::Approx(3.0 * std::exp(1.0)));
  CHECK(grad_values(f, wrt)[0] == 0.0);
  const Var late = t.variable(4.0);
  const std::vector<Var> w2{late};
  CHECK(grad(f, w2).value(0) == 0.0);
}

TEST_CASE("intermediate nodes give partial derivatives") {
  Tape t;
  const Var x = t.variable(2.0);
  const Var u = x * x;
  const Var f = u * x;
  const std::vector<Var> wrt{u, x};
  const auto taped = grad(f, wrt).values();
  const auto numeric = grad_values(f, wrt);
  CHECK(taped[0] == doctest::Approx(2.0));
  CHECK(taped[1] == doctest::Approx(12.0));
  CHECK(numeric[0] == doctest::Approx(2.0));
  CHECK(numeric[1] == doctest::Approx(12.0));
}

TEST_CASE("usage errors") {
  Tape t;
  const Var x = t.variable(1.0);
  const std::vector<Var> outs{x * 2.0, x * 3.0};
  const std::vector<Var> wrt{x};
  CHECK_THROWS_AS(grad(std::span<const Var>(outs), wrt), UsageError);
  const std::vector<Var> one{x * 2.0};
  CHECK(grad(std::span<const Var>(one), wrt).value(0) == doctest::Approx(2.0));
  Tape other;
  const Var y = other.variable(1.0);
  CHECK_THROWS_AS(x + y, UsageError);
  auto bad = [](Tape&, std::span<const Var> v) { return log(v[0]); };
  CHECK_THROWS_AS(finite_difference_check(bad, std::vector<double>{-1.0}, 1e-5), NumericError);
}

TEST_CASE("constant folding keeps values") {
  Tape t;
  const Var a = t.constant(2.0);
  const Var b = t.constant(5.0);
  const Var c = a * b + exp(a);
  CHECK(t.is_constant(c.index));
  CHECK(c.value() == doctest::Approx(10.0 + std::exp(2.0)));
}
