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
#include <functional>
#include <span>
#include <vector>

namespace fogan::ad {

enum class Op : std::uint8_t {
  Constant,
  Variable,
  Add,
  Sub,
  Mul,
  Neg,
  Reciprocal,
  Exp,
  Log,
  Tanh,
  Sigmoid,   // 1 / (1 + exp(-aux * a))
  Softplus,  // log(1 + exp(aux * a)) / aux
  Power,     // a ^ aux
  Sqrt,
  MaxConst,  // max(a, aux)
  AddConst,  // a + aux
  MulConst,  // a * aux
  Sum,       // n-ary; a = offset into the argument list, b = count
  Dot,       // n-ary; arguments [a, a+b) dotted with [a+b, a+2b)
};

struct Node {
  double value;
  double aux;
  std::int32_t a;
  std::int32_t b;
  Op op;
};

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives and
// is not cleared.
struct Var {
  Tape* tape = nullptr;
  std::int32_t index = -1;

  double value() const;
  bool valid() const { return tape != nullptr; }
};

// Append-only expression graph. Reverse passes may append further nodes,
// which is what makes derivatives differentiable again.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var variable(double v);
  Var constant(double v);
  std::vector<Var> variables(std::span<const double> v);

  void clear();
  // Changes whenever previously returned handles become invalid, and is
  // unique across tapes.
  std::uint64_t generation() const { return generation_; }
  void reserve(std::size_t nodes, std::size_t args);
  std::size_t size() const { return nodes_.size(); }

  const Node& node(std::int32_t i) const { return nodes_[static_cast<std::size_t>(i)]; }
  double value(std::int32_t i) const { return nodes_[static_cast<std::size_t>(i)].value; }
  bool is_constant(std::int32_t i) const { return nodes_[static_cast<std::size_t>(i)].op == Op::Constant; }

  // Low-level constructors used by the free functions below.
  Var unary(Op op, Var a, double aux = 0.0);
  Var binary(Op op, Var a, Var b);
  Var nary_sum(std::span<const Var> xs);
  Var nary_dot(std::span<const Var> us, std::span<const Var> vs);

  const std::int32_t* args(std::int32_t offset) const { return args_.data() + offset; }

 private:
  Var push(Op op, double value, std::int32_t a, std::int32_t b, double aux);

  static std::uint64_t next_generation();

  std::vector<Node> nodes_;
  std::vector<std::int32_t> args_;
  std::uint64_t generation_ = next_generation();
};

// Derivatives of one scalar with respect to a list of nodes, stored as
// nodes so they can be differentiated again.
struct Gradient {
  std::vector<std::int32_t> ids;
  std::vector<Var> nodes;

  std::size_t size() const { return nodes.size(); }
  Var operator[](std::size_t i) const { return nodes[i]; }
  double value(std::size_t i) const { return nodes[i].value(); }
  std::vector<double> values() const;
};

// Reverse pass that records its own operations. Entries for nodes the
// output does not depend on are exact zero constants. wrt may contain
// intermediate nodes, in which case the entry is the partial derivative
// holding that node's value fixed with respect to its own parents.
Gradient grad(Var output, std::span<const Var> wrt);

// Same contract for callers holding a list of outputs; anything other than a
// single output throws UsageError.
Gradient grad(std::span<const Var> outputs, std::span<const Var> wrt);

// Numeric reverse pass. Does not grow the tape.
std::vector<double> grad_values(Var output, std::span<const Var> wrt);

using ScalarLoss = std::function<Var(Tape&, std::span<const Var>)>;

// Largest relative discrepancy, |g - d| / max(|g|, |d|, 1e-8), between the
// reverse-mode gradient of loss at `at` and central differences of step h.
double finite_difference_check(const ScalarLoss& loss, std::span<const double> at,
                               double step);

// Arithmetic.
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator+(Var a, double c);
Var operator+(double c, Var a);
Var operator-(Var a, double c);
Var operator-(double c, Var a);
Var operator*(Var a, double c);
Var operator*(double c, Var a);
Var operator/(Var a, double c);
Var operator/(double c, Var a);
Var& operator+=(Var& a, Var b);
Var& operator-=(Var& a, Var b);
Var& operator*=(Var& a, Var b);

Var reciprocal(Var a);
Var exp(Var a);
Var log(Var a);
Var tanh(Var a);
Var sigmoid(Var a, double scale = 1.0);
Var softplus(Var a, double beta = 1.0);
Var pow(Var a, double p);
Var sqrt(Var a);
Var square(Var a);
Var max(Var a, double c);
Var sum(std::span<const Var> xs);
Var dot(std::span<const Var> us, std::span<const Var> vs);

}  // namespace fogan::ad
