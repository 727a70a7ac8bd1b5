// Copyright 2026 The bavae Authors
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

#include "bavae/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "bavae/error.hpp"
#include "bavae/rng.hpp"

namespace bavae::ad {

std::size_t shape_size(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

std::vector<double>& Node::ensure_grad() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  return grad;
}

namespace {

thread_local bool g_grad_enabled = true;

}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

namespace {

struct MatDims {
  std::size_t r, c;
};

MatDims dims(const Shape& s) {
  switch (s.size()) {
    case 0: return {1, 1};
    case 1: return {1, s[0]};
    case 2: return {s[0], s[1]};
    default: throw DimensionError("tensor: rank > 2 is not supported");
  }
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " +
                       shape_str(a) + " and " + shape_str(b));
}

Tensor make_result(const char* op, Shape shape, std::vector<double> value,
                   std::vector<std::shared_ptr<Node>> parents,
                   std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->op = op;
  const bool needs = g_grad_enabled && std::any_of(parents.begin(), parents.end(),
                                 [](const auto& p) { return p->requires_grad; });
  if (needs) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

// Broadcast layout of a binary op over an R x C output.
struct Broadcast {
  Shape out_shape;
  std::size_t R, C;
  std::size_t a_row, a_col, b_row, b_col;  // strides (0 = broadcast)
};

Broadcast plan_broadcast(const char* op, const Tensor& a, const Tensor& b) {
  const auto da = dims(a.shape());
  const auto db = dims(b.shape());
  auto merge = [&](std::size_t x, std::size_t y) {
    if (x == y || y == 1) return x;
    if (x == 1) return y;
    shape_error(op, a.shape(), b.shape());
  };
  Broadcast p;
  p.R = merge(da.r, db.r);
  p.C = merge(da.c, db.c);
  if (a.shape() == b.shape()) {
    p.out_shape = a.shape();
  } else if (b.size() == 1 && a.rank() >= b.rank()) {
    p.out_shape = a.shape();
  } else if (a.size() == 1 && b.rank() >= a.rank()) {
    p.out_shape = b.shape();
  } else {
    p.out_shape = {p.R, p.C};
  }
  p.a_row = da.r == 1 ? 0 : da.c;
  p.a_col = da.c == 1 ? 0 : 1;
  p.b_row = db.r == 1 ? 0 : db.c;
  p.b_col = db.c == 1 ? 0 : 1;
  return p;
}

// f(x, y) forward; dx(x, y), dy(x, y) partials.
template <class F, class DX, class DY>
Tensor binary(const char* op, const Tensor& a, const Tensor& b, F f, DX dx,
              DY dy) {
  const Broadcast p = plan_broadcast(op, a, b);
  const auto& av = a.node()->value;
  const auto& bv = b.node()->value;
  std::vector<double> out(p.R * p.C);
  for (std::size_t i = 0; i < p.R; ++i) {
    for (std::size_t j = 0; j < p.C; ++j) {
      out[i * p.C + j] =
          f(av[i * p.a_row + j * p.a_col], bv[i * p.b_row + j * p.b_col]);
    }
  }
  return make_result(
      op, p.out_shape, std::move(out), {a.node(), b.node()},
      [p, dx, dy](Node& self) {
        auto& A = *self.parents[0];
        auto& B = *self.parents[1];
        const auto& g = self.grad;
        if (A.requires_grad) {
          auto& ga = A.ensure_grad();
          for (std::size_t i = 0; i < p.R; ++i) {
            for (std::size_t j = 0; j < p.C; ++j) {
              const auto ia = i * p.a_row + j * p.a_col;
              const auto ib = i * p.b_row + j * p.b_col;
              ga[ia] += g[i * p.C + j] * dx(A.value[ia], B.value[ib]);
            }
          }
        }
        if (B.requires_grad) {
          auto& gb = B.ensure_grad();
          for (std::size_t i = 0; i < p.R; ++i) {
            for (std::size_t j = 0; j < p.C; ++j) {
              const auto ia = i * p.a_row + j * p.a_col;
              const auto ib = i * p.b_row + j * p.b_col;
              gb[ib] += g[i * p.C + j] * dy(A.value[ia], B.value[ib]);
            }
          }
        }
      });
}

// f(x) forward; df(x, y) derivative given input x and output y.
template <class F, class DF>
Tensor unary(const char* op, const Tensor& a, F f, DF df) {
  const auto& av = a.node()->value;
  std::vector<double> out(av.size());
  std::transform(av.begin(), av.end(), out.begin(), f);
  return make_result(op, a.shape(), std::move(out), {a.node()},
                     [df](Node& self) {
                       auto& A = *self.parents[0];
                       auto& ga = A.ensure_grad();
                       for (std::size_t i = 0; i < ga.size(); ++i) {
                         ga[i] += self.grad[i] * df(A.value[i], self.value[i]);
                       }
                     });
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor::Tensor() : node_(std::make_shared<Node>()) {
  node_->value.assign(1, 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : node_(std::make_shared<Node>()) {
  if (shape.size() > 2) throw DimensionError("tensor: rank > 2 is not supported");
  if (shape_size(shape) != data.size()) {
    throw DimensionError("tensor: shape " + shape_str(shape) + " needs " +
                         std::to_string(shape_size(shape)) + " values, got " +
                         std::to_string(data.size()));
  }
  node_->shape = std::move(shape);
  node_->value = std::move(data);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({}, {value}, requires_grad);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> data, bool requires_grad) {
  return Tensor({rows, cols}, std::move(data), requires_grad);
}

std::size_t Tensor::rows() const { return dims(shape()).r; }
std::size_t Tensor::cols() const { return dims(shape()).c; }

double Tensor::item() const {
  if (size() != 1) {
    throw DimensionError("item: tensor of shape " + shape_str(shape()) +
                         " is not a scalar");
  }
  return node_->value[0];
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return Tensor(shape(), node_->value, false); }

void Tensor::backward() const {
  if (size() != 1) {
    throw DimensionError("backward: loss of shape " + shape_str(shape()) +
                         " is not a scalar");
  }
  if (!node_->requires_grad) return;

  // Post-order DFS; reversed it is a valid execution order for the rules.
  std::vector<Node*> tape;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      tape.push_back(n);
      stack.pop_back();
    }
  }
  for (Node* n : tape) {
    if (!n->is_leaf()) n->grad.assign(n->value.size(), 0.0);
  }
  node_->ensure_grad()[0] += 1.0;
  for (auto it = tape.rbegin(); it != tape.rend(); ++it) {
    if (!(*it)->is_leaf() && (*it)->backward) (*it)->backward(**it);
  }
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

Tensor scale(const Tensor& a, double c) {
  return unary(
      "scale", a, [c](double x) { return c * x; },
      [c](double, double) { return c; });
}

Tensor add_scalar(const Tensor& a, double c) {
  return unary(
      "add_scalar", a, [c](double x) { return x + c; },
      [](double, double) { return 1.0; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  const auto da = dims(a.shape());
  const auto db = dims(b.shape());
  if (da.c != db.r) shape_error("matmul", a.shape(), b.shape());
  const std::size_t R = da.r, K = da.c, C = db.c;
  const double* av = a.node()->value.data();
  const double* bv = b.node()->value.data();
  std::vector<double> out(R * C, 0.0);
  for (std::size_t i = 0; i < R; ++i) {
    double* orow = out.data() + i * C;
    for (std::size_t k = 0; k < K; ++k) {
      const double x = av[i * K + k];
      if (x == 0.0) continue;
      const double* brow = bv + k * C;
      for (std::size_t j = 0; j < C; ++j) orow[j] += x * brow[j];
    }
  }
  return make_result(
      "matmul", {R, C}, std::move(out), {a.node(), b.node()},
      [R, K, C](Node& self) {
        auto& A = *self.parents[0];
        auto& B = *self.parents[1];
        const double* g = self.grad.data();
        if (A.requires_grad) {
          auto& ga = A.ensure_grad();
          for (std::size_t i = 0; i < R; ++i) {
            const double* grow = g + i * C;
            for (std::size_t k = 0; k < K; ++k) {
              const double* brow = B.value.data() + k * C;
              double acc = 0.0;
              for (std::size_t j = 0; j < C; ++j) acc += grow[j] * brow[j];
              ga[i * K + k] += acc;
            }
          }
        }
        if (B.requires_grad) {
          auto& gb = B.ensure_grad();
          for (std::size_t i = 0; i < R; ++i) {
            const double* grow = g + i * C;
            for (std::size_t k = 0; k < K; ++k) {
              const double x = A.value[i * K + k];
              if (x == 0.0) continue;
              double* gbrow = gb.data() + k * C;
              for (std::size_t j = 0; j < C; ++j) gbrow[j] += x * grow[j];
            }
          }
        }
      });
}

Tensor transpose(const Tensor& a) {
  const auto d = dims(a.shape());
  const auto& av = a.node()->value;
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < d.r; ++i) {
    for (std::size_t j = 0; j < d.c; ++j) out[j * d.r + i] = av[i * d.c + j];
  }
  return make_result("transpose", {d.c, d.r}, std::move(out), {a.node()},
                     [d](Node& self) {
                       auto& ga = self.parents[0]->ensure_grad();
                       for (std::size_t i = 0; i < d.r; ++i) {
                         for (std::size_t j = 0; j < d.c; ++j) {
                           ga[i * d.c + j] += self.grad[j * d.r + i];
                         }
                       }
                     });
}

Tensor sum(const Tensor& a) {
  const auto& av = a.node()->value;
  const double s = std::accumulate(av.begin(), av.end(), 0.0);
  return make_result("sum", {}, {s}, {a.node()}, [](Node& self) {
    auto& ga = self.parents[0]->ensure_grad();
    for (double& g : ga) g += self.grad[0];
  });
}

Tensor sum(const Tensor& a, int axis) {
  const auto d = dims(a.shape());
  const auto& av = a.node()->value;
  if (axis != 0 && axis != 1) throw DimensionError("sum: axis must be 0 or 1");
  const bool rows = axis == 0;
  std::vector<double> out(rows ? d.c : d.r, 0.0);
  for (std::size_t i = 0; i < d.r; ++i) {
    for (std::size_t j = 0; j < d.c; ++j) {
      out[rows ? j : i] += av[i * d.c + j];
    }
  }
  Shape shape = rows ? Shape{1, d.c} : Shape{d.r, 1};
  return make_result("sum_axis", std::move(shape), std::move(out), {a.node()},
                     [d, rows](Node& self) {
                       auto& ga = self.parents[0]->ensure_grad();
                       for (std::size_t i = 0; i < d.r; ++i) {
                         for (std::size_t j = 0; j < d.c; ++j) {
                           ga[i * d.c + j] += self.grad[rows ? j : i];
                         }
                       }
                     });
}

Tensor mean(const Tensor& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor sigmoid(const Tensor& a) {
  return unary("sigmoid", a, stable_sigmoid,
               [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return unary(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& a) {
  return unary(
      "exp", a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary(
      "log", a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Tensor softplus(const Tensor& a) {
  return unary(
      "softplus", a,
      [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); },
      [](double x, double) { return stable_sigmoid(x); });
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  if (axis != 0 && axis != 1) throw DimensionError("concat: axis must be 0 or 1");
  std::vector<MatDims> d;
  for (const auto& p : parts) d.push_back(dims(p.shape()));
  std::size_t R = 0, C = 0;
  if (axis == 0) {
    C = d[0].c;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (d[k].c != C) shape_error("concat", parts[0].shape(), parts[k].shape());
      R += d[k].r;
    }
  } else {
    R = d[0].r;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (d[k].r != R) shape_error("concat", parts[0].shape(), parts[k].shape());
      C += d[k].c;
    }
  }
  std::vector<double> out(R * C);
  std::vector<std::shared_ptr<Node>> parents;
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& v = parts[k].node()->value;
    offsets.push_back(off);
    for (std::size_t i = 0; i < d[k].r; ++i) {
      for (std::size_t j = 0; j < d[k].c; ++j) {
        const std::size_t oi = axis == 0 ? off + i : i;
        const std::size_t oj = axis == 0 ? j : off + j;
        out[oi * C + oj] = v[i * d[k].c + j];
      }
    }
    off += axis == 0 ? d[k].r : d[k].c;
    parents.push_back(parts[k].node());
  }
  return make_result("concat", {R, C}, std::move(out), std::move(parents),
                     [d, offsets, axis, C](Node& self) {
                       for (std::size_t k = 0; k < self.parents.size(); ++k) {
                         auto& P = *self.parents[k];
                         if (!P.requires_grad) continue;
                         auto& gp = P.ensure_grad();
                         for (std::size_t i = 0; i < d[k].r; ++i) {
                           for (std::size_t j = 0; j < d[k].c; ++j) {
                             const std::size_t oi = axis == 0 ? offsets[k] + i : i;
                             const std::size_t oj = axis == 0 ? j : offsets[k] + j;
                             gp[i * d[k].c + j] += self.grad[oi * C + oj];
                           }
                         }
                       }
                     });
}

Tensor slice(const Tensor& a, int axis, std::size_t start, std::size_t length) {
  const auto d = dims(a.shape());
  if (axis != 0 && axis != 1) throw DimensionError("slice: axis must be 0 or 1");
  const std::size_t extent = axis == 0 ? d.r : d.c;
  if (start + length > extent) {
    throw DimensionError("slice: range [" + std::to_string(start) + ", " +
                         std::to_string(start + length) + ") exceeds " +
                         shape_str(a.shape()));
  }
  const std::size_t R = axis == 0 ? length : d.r;
  const std::size_t C = axis == 0 ? d.c : length;
  const std::size_t r0 = axis == 0 ? start : 0;
  const std::size_t c0 = axis == 0 ? 0 : start;
  const auto& av = a.node()->value;
  std::vector<double> out(R * C);
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < C; ++j) out[i * C + j] = av[(r0 + i) * d.c + c0 + j];
  }
  return make_result("slice", {R, C}, std::move(out), {a.node()},
                     [d, R, C, r0, c0](Node& self) {
                       auto& ga = self.parents[0]->ensure_grad();
                       for (std::size_t i = 0; i < R; ++i) {
                         for (std::size_t j = 0; j < C; ++j) {
                           ga[(r0 + i) * d.c + c0 + j] += self.grad[i * C + j];
                         }
                       }
                     });
}

Tensor broadcast_to(const Tensor& a, const Shape& shape) {
  // Adding zeros reuses the broadcasting rules and their reduction.
  const Tensor zero = Tensor::zeros(shape);
  const Broadcast p = plan_broadcast("broadcast_to", a, zero);
  if (p.R * p.C != shape_size(shape)) shape_error("broadcast_to", a.shape(), shape);
  Tensor out = add(a, zero);
  out.node()->shape = shape;
  out.node()->op = "broadcast_to";
  return out;
}

Tensor gather_cols(const Tensor& a, std::span<const int> index) {
  const auto d = dims(a.shape());
  for (int k : index) {
    if (k >= static_cast<int>(d.c)) {
      throw DimensionError("gather_cols: index " + std::to_string(k) +
                           " out of range for " + shape_str(a.shape()));
    }
  }
  const std::size_t C = index.size();
  std::vector<int> idx(index.begin(), index.end());
  const auto& av = a.node()->value;
  std::vector<double> out(d.r * C, 0.0);
  for (std::size_t i = 0; i < d.r; ++i) {
    for (std::size_t j = 0; j < C; ++j) {
      if (idx[j] >= 0) out[i * C + j] = av[i * d.c + idx[j]];
    }
  }
  return make_result("gather_cols", {d.r, C}, std::move(out), {a.node()},
                     [d, C, idx = std::move(idx)](Node& self) {
                       auto& ga = self.parents[0]->ensure_grad();
                       for (std::size_t i = 0; i < d.r; ++i) {
                         for (std::size_t j = 0; j < C; ++j) {
                           if (idx[j] >= 0) ga[i * d.c + idx[j]] += self.grad[i * C + j];
                         }
                       }
                     });
}

double gradient_check(const std::function<Tensor()>& loss, Tensor x,
                      int coordinates, Rng& rng, double h) {
  x.set_requires_grad(true);
  x.zero_grad();
  loss().backward();
  std::vector<double> analytic(x.grad().begin(), x.grad().end());
  // x never reached the loss: every analytic component is 0.
  if (analytic.size() != x.size()) analytic.assign(x.size(), 0.0);

  std::vector<std::size_t> coords(x.size());
  std::iota(coords.begin(), coords.end(), 0);
  if (coordinates < static_cast<int>(coords.size())) {
    for (int i = 0; i < coordinates; ++i) {
      const auto j = static_cast<std::size_t>(
          rng.uniform_int(i, static_cast<std::int64_t>(coords.size()) - 1));
      std::swap(coords[i], coords[j]);
    }
    coords.resize(coordinates);
  }

  double worst = 0.0;
  auto values = x.mutable_data();
  for (auto c : coords) {
    const double saved = values[c];
    auto at = [&](double v) {
      values[c] = v;
      return loss().item();
    };
    // Five-point estimates on a ladder of steps; keep the one that best
    // agrees with its smaller-step neighbour.
    std::vector<double> est;
    for (int k = 0; k < 5; ++k) {
      const double s = h * std::pow(10.0, -k);
      const double d1 = at(saved + s) - at(saved - s);
      const double d2 = at(saved + 2 * s) - at(saved - 2 * s);
      est.push_back((8 * d1 - d2) / (12 * s));
    }
    values[c] = saved;
    double fd = est[0], spread = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < est.size(); ++k) {
      const double d = std::abs(est[k] - est[k + 1]);
      if (d < spread) {
        spread = d;
        fd = est[k];
      }
    }
    const double err = std::abs(analytic[c] - fd) /
                       std::max(1e-8, std::abs(analytic[c]) + std::abs(fd));
    worst = std::max(worst, err);
  }
  return worst;
}

double gradient_check(const std::function<Tensor(const Tensor&)>& f, Tensor x,
                      int coordinates, Rng& rng, double h) {
  return gradient_check([&] { return f(x); }, x, coordinates, rng, h);
}

}  // namespace bavae::ad
