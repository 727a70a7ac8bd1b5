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

#ifndef BAVAE_TENSOR_HPP_
#define BAVAE_TENSOR_HPP_

// Define-by-run reverse-mode differentiation over dense double tensors.
//
// Every op on tensors that require gradients records its inputs and a
// backward rule on the output node. backward() orders the recorded nodes
// topologically (the tape) and runs each rule once. Tensors are rank 0, 1 or
// 2; a rank-1 tensor of length c behaves as a 1 x c row where a matrix is
// expected. Binary elementwise ops broadcast along trailing dimensions: a
// dimension of size 1 stretches to match the other operand.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace bavae {
class Rng;
}

namespace bavae::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& s);
std::string shape_str(const Shape& s);

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until a gradient reaches this node
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  bool is_leaf() const { return parents.empty(); }
  std::vector<double>& ensure_grad();
};

class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  // Row-major matrix literal.
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> data, bool requires_grad = false);

  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->value.size(); }
  // Matrix view: rank 0 -> 1x1, rank 1 (c) -> 1 x c.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const { return node_->value; }
  // Direct access for optimisers and finite differences; never use on a
  // tensor whose value feeds a live tape.
  std::span<double> mutable_data() { return node_->value; }
  std::span<const double> grad() const { return node_->grad; }
  double at(std::size_t i) const { return node_->value[i]; }
  double at(std::size_t r, std::size_t c) const {
    return node_->value[r * cols() + c];
  }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  void zero_grad();

  // Accumulates d(this)/d(leaf) into every gradient-requiring leaf. Grads of
  // intermediate nodes are reset first, so repeated calls add up cleanly.
  void backward() const;

  // Copy of the value, cut from the tape.
  Tensor detach() const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// While alive, ops on this thread record nothing (inference mode).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// Elementwise with broadcasting.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(const Tensor& a, const Tensor& b);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor sum(const Tensor& a);
// axis 0 -> 1 x cols, axis 1 -> rows x 1.
Tensor sum(const Tensor& a, int axis);
Tensor mean(const Tensor& a);

Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
// log(1 + e^x), evaluated without overflow.
Tensor softplus(const Tensor& a);

// axis 0 stacks rows, axis 1 joins columns.
Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor slice(const Tensor& a, int axis, std::size_t start, std::size_t length);
Tensor broadcast_to(const Tensor& a, const Shape& shape);

// out[r][k] = a[r][index[k]], or 0 where index[k] < 0. Column gathers cover
// permutations, diagonals and symmetric scatters from triangle vectors.
Tensor gather_cols(const Tensor& a, std::span<const int> index);

// Max over sampled coordinates of |g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|),
// g_fd is a five-point central difference at steps h, h/10, ..., h/1e4; the
// estimate closest to its next smaller step is used. `loss` must rebuild its
// graph from the current value of `x` on every call.
double gradient_check(const std::function<Tensor()>& loss, Tensor x,
                      int coordinates, Rng& rng, double h = 1e-2);
double gradient_check(const std::function<Tensor(const Tensor&)>& f, Tensor x,
                      int coordinates, Rng& rng, double h = 1e-2);

}  // namespace bavae::ad

#endif  // BAVAE_TENSOR_HPP_
