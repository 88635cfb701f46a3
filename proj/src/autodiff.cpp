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

#include "fogan/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "fogan/error.hpp"

namespace fogan::ad {

namespace {

double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double stable_softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double eval_unary(Op op, double a, double aux) {
  switch (op) {
    case Op::Neg: return -a;
    case Op::Reciprocal: return 1.0 / a;
    case Op::Exp: return std::exp(a);
    case Op::Log: return std::log(a);
    case Op::Tanh: return std::tanh(a);
    case Op::Sigmoid: return stable_sigmoid(aux * a);
    case Op::Softplus: return stable_softplus(aux * a) / aux;
    case Op::Power: return std::pow(a, aux);
    case Op::Sqrt: return std::sqrt(a);
    case Op::MaxConst: return a > aux ? a : aux;
    case Op::AddConst: return a + aux;
    case Op::MulConst: return a * aux;
    default: throw UsageError("not a unary operation");
  }
}

double eval_binary(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    default: throw UsageError("not a binary operation");
  }
}

Tape& tape_of(Var a) {
  if (!a.valid()) throw UsageError("variable is not attached to a tape");
  return *a.tape;
}

Tape& tape_of(Var a, Var b) {
  if (!a.valid() || !b.valid()) throw UsageError("variable is not attached to a tape");
  if (a.tape != b.tape) throw UsageError("operands live on different tapes");
  return *a.tape;
}

bool is_const(Var v) { return v.tape->is_constant(v.index); }
bool is_const(Var v, double c) { return is_const(v) && v.value() == c; }

}  // namespace

double Var::value() const {
  if (!tape) throw UsageError("variable is not attached to a tape");
  return tape->value(index);
}

Var Tape::push(Op op, double value, std::int32_t a, std::int32_t b, double aux) {
  if (nodes_.size() >= static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
    throw UsageError("tape is full");
  }
  nodes_.push_back(Node{value, aux, a, b, op});
  return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
}

Var Tape::variable(double v) { return push(Op::Variable, v, -1, -1, 0.0); }
Var Tape::constant(double v) { return push(Op::Constant, v, -1, -1, 0.0); }

std::vector<Var> Tape::variables(std::span<const double> v) {
  std::vector<Var> out;
  out.reserve(v.size());
  for (double x : v) out.push_back(variable(x));
  return out;
}

std::uint64_t Tape::next_generation() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

void Tape::clear() {
  nodes_.clear();
  args_.clear();
  generation_ = next_generation();
}

void Tape::reserve(std::size_t nodes, std::size_t args) {
  nodes_.reserve(nodes);
  args_.reserve(args);
}

Var Tape::unary(Op op, Var a, double aux) {
  if (a.tape != this) throw UsageError("operand lives on a different tape");
  const double v = eval_unary(op, value(a.index), aux);
  if (is_constant(a.index)) return constant(v);
  return push(op, v, a.index, -1, aux);
}

Var Tape::binary(Op op, Var a, Var b) {
  if (a.tape != this || b.tape != this) throw UsageError("operand lives on a different tape");
  const double v = eval_binary(op, value(a.index), value(b.index));
  if (is_constant(a.index) && is_constant(b.index)) return constant(v);
  return push(op, v, a.index, b.index, 0.0);
}

Var Tape::nary_sum(std::span<const Var> xs) {
  if (xs.empty()) return constant(0.0);
  if (xs.size() == 1) return xs[0];
  const auto offset = static_cast<std::int32_t>(args_.size());
  double acc = 0.0;
  double folded = 0.0;
  std::int32_t count = 0;
  for (const Var& x : xs) {
    if (x.tape != this) throw UsageError("operand lives on a different tape");
    acc += value(x.index);
    if (is_constant(x.index)) {
      folded += value(x.index);
    } else {
      args_.push_back(x.index);
      ++count;
    }
  }
  if (count == 0) {
    args_.resize(static_cast<std::size_t>(offset));
    return constant(acc);
  }
  if (folded != 0.0) {
    args_.push_back(constant(folded).index);
    ++count;
  }
  if (count == 1) {
    const std::int32_t only = args_[static_cast<std::size_t>(offset)];
    args_.resize(static_cast<std::size_t>(offset));
    return Var{this, only};
  }
  return push(Op::Sum, acc, offset, count, 0.0);
}

Var Tape::nary_dot(std::span<const Var> us, std::span<const Var> vs) {
  if (us.size() != vs.size()) throw ShapeError("dot: length mismatch");
  if (us.empty()) return constant(0.0);
  const auto offset = static_cast<std::int32_t>(args_.size());
  const auto n = static_cast<std::int32_t>(us.size());
  double acc = 0.0;
  bool all_const = true;
  args_.resize(args_.size() + 2 * us.size());
  for (std::int32_t k = 0; k < n; ++k) {
    const Var u = us[static_cast<std::size_t>(k)];
    const Var v = vs[static_cast<std::size_t>(k)];
    if (u.tape != this || v.tape != this) throw UsageError("operand lives on a different tape");
    acc += value(u.index) * value(v.index);
    all_const = all_const && is_constant(u.index) && is_constant(v.index);
    args_[static_cast<std::size_t>(offset + k)] = u.index;
    args_[static_cast<std::size_t>(offset + n + k)] = v.index;
  }
  if (all_const) {
    args_.resize(static_cast<std::size_t>(offset));
    return constant(acc);
  }
  return push(Op::Dot, acc, offset, n, 0.0);
}

std::vector<double> Gradient::values() const {
  std::vector<double> out;
  out.reserve(nodes.size());
  for (const Var& v : nodes) out.push_back(v.value());
  return out;
}

// ---------------------------------------------------------------------------
// Arithmetic with light constant folding. Folding keeps retaped reverse
// passes small: seeds and local derivatives are often exact constants.

Var operator+(Var a, Var b) {
  Tape& t = tape_of(a, b);
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (is_const(a) && !is_const(b)) return t.unary(Op::AddConst, b, a.value());
  if (is_const(b) && !is_const(a)) return t.unary(Op::AddConst, a, b.value());
  return t.binary(Op::Add, a, b);
}

Var operator-(Var a, Var b) {
  Tape& t = tape_of(a, b);
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return -b;
  if (is_const(b) && !is_const(a)) return t.unary(Op::AddConst, a, -b.value());
  return t.binary(Op::Sub, a, b);
}

Var operator*(Var a, Var b) {
  Tape& t = tape_of(a, b);
  if (is_const(a) && !is_const(b)) return b * a.value();
  if (is_const(b) && !is_const(a)) return a * b.value();
  return t.binary(Op::Mul, a, b);
}

Var operator/(Var a, Var b) { return a * reciprocal(b); }

Var operator-(Var a) { return tape_of(a).unary(Op::Neg, a); }

Var operator+(Var a, double c) {
  if (c == 0.0) return a;
  return tape_of(a).unary(Op::AddConst, a, c);
}
Var operator+(double c, Var a) { return a + c; }
Var operator-(Var a, double c) { return a + (-c); }
Var operator-(double c, Var a) { return (-a) + c; }

Var operator*(Var a, double c) {
  Tape& t = tape_of(a);
  if (c == 1.0) return a;
  if (c == 0.0) return t.constant(0.0);
  if (c == -1.0) return t.unary(Op::Neg, a);
  return t.unary(Op::MulConst, a, c);
}
Var operator*(double c, Var a) { return a * c; }
Var operator/(Var a, double c) { return a * (1.0 / c); }
Var operator/(double c, Var a) { return reciprocal(a) * c; }

Var& operator+=(Var& a, Var b) { return a = a + b; }
Var& operator-=(Var& a, Var b) { return a = a - b; }
Var& operator*=(Var& a, Var b) { return a = a * b; }

Var reciprocal(Var a) { return tape_of(a).unary(Op::Reciprocal, a); }
Var exp(Var a) { return tape_of(a).unary(Op::Exp, a); }
Var log(Var a) { return tape_of(a).unary(Op::Log, a); }
Var tanh(Var a) { return tape_of(a).unary(Op::Tanh, a); }
Var sigmoid(Var a, double scale) { return tape_of(a).unary(Op::Sigmoid, a, scale); }

Var softplus(Var a, double beta) {
  if (!(beta > 0.0)) throw DomainError("softplus: beta must be positive");
  return tape_of(a).unary(Op::Softplus, a, beta);
}

Var pow(Var a, double p) {
  Tape& t = tape_of(a);
  if (p == 1.0) return a;
  if (p == 0.0) return t.constant(1.0);
  return t.unary(Op::Power, a, p);
}

Var sqrt(Var a) { return tape_of(a).unary(Op::Sqrt, a); }
Var square(Var a) { return a * a; }
Var max(Var a, double c) { return tape_of(a).unary(Op::MaxConst, a, c); }

Var sum(std::span<const Var> xs) {
  if (xs.empty()) throw UsageError("sum of an empty list has no tape");
  return tape_of(xs[0]).nary_sum(xs);
}

Var dot(std::span<const Var> us, std::span<const Var> vs) {
  if (us.empty()) throw UsageError("dot of empty lists has no tape");
  return tape_of(us[0]).nary_dot(us, vs);
}

// ---------------------------------------------------------------------------
// Reverse passes.

namespace {

// Marks nodes in [lo, hi] that depend on any node of wrt.
std::vector<std::uint8_t> dependency_mask(const Tape& t, std::int32_t lo, std::int32_t hi,
                                          std::span<const Var> wrt) {
  std::vector<std::uint8_t> dep(static_cast<std::size_t>(hi - lo + 1), 0);
  for (const Var& w : wrt) {
    if (w.index >= lo && w.index <= hi) dep[static_cast<std::size_t>(w.index - lo)] = 2;
  }
  auto marked = [&](std::int32_t j) {
    return j >= lo && dep[static_cast<std::size_t>(j - lo)] != 0;
  };
  for (std::int32_t i = lo; i <= hi; ++i) {
    auto& d = dep[static_cast<std::size_t>(i - lo)];
    if (d) continue;
    const Node& n = t.node(i);
    switch (n.op) {
      case Op::Constant:
      case Op::Variable:
        break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
        d = marked(n.a) || marked(n.b);
        break;
      case Op::Sum: {
        const std::int32_t* args = t.args(n.a);
        for (std::int32_t k = 0; k < n.b && !d; ++k) d = marked(args[k]);
        break;
      }
      case Op::Dot: {
        const std::int32_t* args = t.args(n.a);
        for (std::int32_t k = 0; k < 2 * n.b && !d; ++k) d = marked(args[k]);
        break;
      }
      default:
        d = marked(n.a);
        break;
    }
  }
  return dep;
}

std::int32_t lowest_index(std::span<const Var> wrt) {
  std::int32_t lo = std::numeric_limits<std::int32_t>::max();
  for (const Var& w : wrt) lo = std::min(lo, w.index);
  return lo;
}

}  // namespace

Gradient grad(std::span<const Var> outputs, std::span<const Var> wrt) {
  if (outputs.size() != 1) throw UsageError("grad: output must be a single scalar");
  return grad(outputs[0], wrt);
}

Gradient grad(Var output, std::span<const Var> wrt) {
  Tape& t = tape_of(output);
  for (const Var& w : wrt) {
    if (w.tape != &t) throw UsageError("grad: variable lives on a different tape");
  }
  Gradient g;
  g.ids.reserve(wrt.size());
  for (const Var& w : wrt) g.ids.push_back(w.index);
  if (wrt.empty()) return g;

  const std::int32_t hi = output.index;
  const std::int32_t lo = lowest_index(wrt);
  if (lo > hi) {
    for (std::size_t k = 0; k < wrt.size(); ++k) g.nodes.push_back(t.constant(0.0));
    return g;
  }
  const auto dep = dependency_mask(t, lo, hi, wrt);
  const auto span_len = static_cast<std::size_t>(hi - lo + 1);

  // Contributions to each adjoint, kept as singly linked lists in one buffer
  // and summed with a single n-ary node when the node is reached.
  std::vector<std::int32_t> head(span_len, -1);
  std::vector<std::int32_t> adjoint(span_len, -1);
  struct Link {
    std::int32_t node;
    std::int32_t next;
  };
  std::vector<Link> links;
  links.reserve(span_len * 2);

  auto contribute = [&](std::int32_t target, Var v) {
    if (target < lo || !dep[static_cast<std::size_t>(target - lo)]) return;
    if (is_const(v, 0.0)) return;
    auto& h = head[static_cast<std::size_t>(target - lo)];
    links.push_back(Link{v.index, h});
    h = static_cast<std::int32_t>(links.size() - 1);
  };

  contribute(hi, t.constant(1.0));
  std::vector<Var> gather;
  for (std::int32_t i = hi; i >= lo; --i) {
    const auto slot = static_cast<std::size_t>(i - lo);
    if (!dep[slot] || head[slot] < 0) continue;
    gather.clear();
    for (std::int32_t l = head[slot]; l >= 0; l = links[static_cast<std::size_t>(l)].next) {
      gather.push_back(Var{&t, links[static_cast<std::size_t>(l)].node});
    }
    std::reverse(gather.begin(), gather.end());
    const Var adj = gather.size() == 1 ? gather[0] : t.nary_sum(gather);
    adjoint[slot] = adj.index;

    const Node n = t.node(i);  // copied: the tape may grow below
    const Var y{&t, i};
    const Var a{&t, n.a};
    const Var b{&t, n.b};
    switch (n.op) {
      case Op::Constant:
      case Op::Variable:
        break;
      case Op::Add:
        contribute(n.a, adj);
        contribute(n.b, adj);
        break;
      case Op::Sub:
        contribute(n.a, adj);
        if (n.b >= lo && dep[static_cast<std::size_t>(n.b - lo)]) contribute(n.b, -adj);
        break;
      case Op::Mul:
        if (n.a >= lo && dep[static_cast<std::size_t>(n.a - lo)]) contribute(n.a, adj * b);
        if (n.b >= lo && dep[static_cast<std::size_t>(n.b - lo)]) contribute(n.b, adj * a);
        break;
      case Op::Neg:
        contribute(n.a, -adj);
        break;
      case Op::Reciprocal:
        contribute(n.a, -(adj * (y * y)));
        break;
      case Op::Exp:
        contribute(n.a, adj * y);
        break;
      case Op::Log:
        contribute(n.a, adj * reciprocal(a));
        break;
      case Op::Tanh:
        contribute(n.a, adj * (1.0 - y * y));
        break;
      case Op::Sigmoid:
        contribute(n.a, adj * ((y * (1.0 - y)) * n.aux));
        break;
      case Op::Softplus:
        contribute(n.a, adj * sigmoid(a, n.aux));
        break;
      case Op::Power:
        contribute(n.a, adj * (pow(a, n.aux - 1.0) * n.aux));
        break;
      case Op::Sqrt:
        contribute(n.a, adj * (reciprocal(y) * 0.5));
        break;
      case Op::MaxConst:
        if (t.value(n.a) > n.aux) contribute(n.a, adj);
        break;
      case Op::AddConst:
        contribute(n.a, adj);
        break;
      case Op::MulConst:
        contribute(n.a, adj * n.aux);
        break;
      case Op::Sum: {
        for (std::int32_t k = 0; k < n.b; ++k) contribute(t.args(n.a)[k], adj);
        break;
      }
      case Op::Dot: {
        for (std::int32_t k = 0; k < n.b; ++k) {
          const std::int32_t u = t.args(n.a)[k];
          const std::int32_t v = t.args(n.a)[n.b + k];
          if (u >= lo && dep[static_cast<std::size_t>(u - lo)]) contribute(u, adj * Var{&t, v});
          if (v >= lo && dep[static_cast<std::size_t>(v - lo)]) contribute(v, adj * Var{&t, u});
        }
        break;
      }
    }
  }

  g.nodes.reserve(wrt.size());
  for (const Var& w : wrt) {
    if (w.index < lo || w.index > hi || adjoint[static_cast<std::size_t>(w.index - lo)] < 0) {
      g.nodes.push_back(t.constant(0.0));
    } else {
      g.nodes.push_back(Var{&t, adjoint[static_cast<std::size_t>(w.index - lo)]});
    }
  }
  return g;
}

std::vector<double> grad_values(Var output, std::span<const Var> wrt) {
  Tape& t = tape_of(output);
  std::vector<double> out(wrt.size(), 0.0);
  if (wrt.empty()) return out;
  for (const Var& w : wrt) {
    if (w.tape != &t) throw UsageError("grad: variable lives on a different tape");
  }
  const std::int32_t hi = output.index;
  const std::int32_t lo = lowest_index(wrt);
  if (lo > hi) return out;

  // Requested adjoints are read off as the sweep passes each wrt node.
  std::vector<double> adj(static_cast<std::size_t>(hi - lo + 1), 0.0);
  adj.back() = 1.0;
  auto at = [&](std::int32_t j) -> double* {
    return j >= lo ? &adj[static_cast<std::size_t>(j - lo)] : nullptr;
  };
  auto add = [&](std::int32_t j, double v) {
    if (double* p = at(j)) *p += v;
  };
  std::vector<double> recorded(wrt.size(), 0.0);
  std::vector<std::int32_t> order(wrt.size());
  for (std::size_t k = 0; k < wrt.size(); ++k) order[k] = static_cast<std::int32_t>(k);
  std::sort(order.begin(), order.end(),
            [&](std::int32_t x, std::int32_t y) { return wrt[x].index > wrt[y].index; });
  std::size_t next = 0;
  while (next < order.size() && wrt[order[next]].index > hi) ++next;

  for (std::int32_t i = hi; i >= lo; --i) {
    const double g = adj[static_cast<std::size_t>(i - lo)];
    while (next < order.size() && wrt[order[next]].index == i) {
      recorded[static_cast<std::size_t>(order[next])] = g;
      ++next;
    }
    if (g == 0.0) continue;
    const Node& n = t.node(i);
    switch (n.op) {
      case Op::Constant:
      case Op::Variable:
        break;
      case Op::Add:
        add(n.a, g);
        add(n.b, g);
        break;
      case Op::Sub:
        add(n.a, g);
        add(n.b, -g);
        break;
      case Op::Mul:
        add(n.a, g * t.value(n.b));
        add(n.b, g * t.value(n.a));
        break;
      case Op::Neg:
        add(n.a, -g);
        break;
      case Op::Reciprocal:
        add(n.a, -g * n.value * n.value);
        break;
      case Op::Exp:
        add(n.a, g * n.value);
        break;
      case Op::Log:
        add(n.a, g / t.value(n.a));
        break;
      case Op::Tanh:
        add(n.a, g * (1.0 - n.value * n.value));
        break;
      case Op::Sigmoid:
        add(n.a, g * n.aux * n.value * (1.0 - n.value));
        break;
      case Op::Softplus:
        add(n.a, g * stable_sigmoid(n.aux * t.value(n.a)));
        break;
      case Op::Power:
        add(n.a, g * n.aux * std::pow(t.value(n.a), n.aux - 1.0));
        break;
      case Op::Sqrt:
        add(n.a, g * 0.5 / n.value);
        break;
      case Op::MaxConst:
        if (t.value(n.a) > n.aux) add(n.a, g);
        break;
      case Op::AddConst:
        add(n.a, g);
        break;
      case Op::MulConst:
        add(n.a, g * n.aux);
        break;
      case Op::Sum: {
        const std::int32_t* args = t.args(n.a);
        for (std::int32_t k = 0; k < n.b; ++k) add(args[k], g);
        break;
      }
      case Op::Dot: {
        const std::int32_t* us = t.args(n.a);
        const std::int32_t* vs = us + n.b;
        for (std::int32_t k = 0; k < n.b; ++k) {
          add(us[k], g * t.value(vs[k]));
          add(vs[k], g * t.value(us[k]));
        }
        break;
      }
    }
  }
  return recorded;
}

double finite_difference_check(const ScalarLoss& loss, std::span<const double> at, double step) {
  if (!(step > 0.0)) throw UsageError("finite_difference_check: step must be positive");
  std::vector<double> analytic;
  {
    Tape t;
    const auto vars = t.variables(at);
    const Var l = loss(t, vars);
    if (!std::isfinite(l.value())) throw NumericError("finite_difference_check: non-finite loss");
    analytic = grad_values(l, vars);
  }
  std::vector<double> x(at.begin(), at.end());
  Tape t;
  auto eval = [&](const std::vector<double>& point) {
    t.clear();
    const auto vars = t.variables(point);
    const double v = loss(t, vars).value();
    if (!std::isfinite(v)) throw NumericError("finite_difference_check: non-finite loss");
    return v;
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double up = eval(x);
    x[i] = saved - step;
    const double down = eval(x);
    x[i] = saved;
    const double fd = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-8});
    worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
  }
  return worst;
}

}  // namespace fogan::ad
