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

#include <doctest.h>

#include <cmath>

#include "bavae/error.hpp"
#include "bavae/optim.hpp"
#include "bavae/rng.hpp"
#include "bavae/tensor.hpp"

using namespace bavae;
using namespace bavae::ad;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor(std::move(shape), std::move(v));
}

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace

TEST_CASE("forward values") {
  CHECK(sigmoid(Tensor::scalar(0.0)).item() == 0.5);
  const auto X = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  const auto I = Tensor::matrix(2, 2, {1, 0, 0, 1});
  CHECK(values(matmul(I, X)) == values(X));
  CHECK(values(transpose(X)) == std::vector<double>{1, 4, 2, 5, 3, 6});
  CHECK(sum(X).item() == 21);
  CHECK(mean(X).item() == 3.5);
  CHECK(values(sum(X, 0)) == std::vector<double>{5, 7, 9});
  CHECK(values(sum(X, 1)) == std::vector<double>{6, 15});
  CHECK(values(relu(Tensor::matrix(1, 3, {-1, 0, 2}))) == std::vector<double>{0, 0, 2});
  CHECK(values(slice(X, 1, 1, 2)) == std::vector<double>{2, 3, 5, 6});
  CHECK(values(slice(X, 0, 1, 1)) == std::vector<double>{4, 5, 6});
  CHECK(values(concat({X, X}, 0)).size() == 12);
  CHECK(values(concat({I, X}, 1)) == std::vector<double>{1, 0, 1, 2, 3, 0, 1, 4, 5, 6});
  const std::vector<int> idx = {2, -1, 0};
  CHECK(values(gather_cols(X, idx)) == std::vector<double>{3, 0, 1, 6, 0, 4});
  CHECK(softplus(Tensor::scalar(800.0)).item() == 800.0);
  CHECK(softplus(Tensor::scalar(0.0)).item() == doctest::Approx(std::log(2.0)));
  CHECK(log(exp(Tensor::scalar(1.5))).item() == doctest::Approx(1.5));
  CHECK(tanh(Tensor::scalar(0.3)).item() == doctest::Approx(std::tanh(0.3)));
}

TEST_CASE("broadcasting") {
  const auto X = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  const auto row = Tensor({3}, {10, 20, 30});
  const auto col = Tensor::matrix(2, 1, {100, 200});
  CHECK(values(X + row) == std::vector<double>{11, 22, 33, 14, 25, 36});
  CHECK(values(X + col) == std::vector<double>{101, 102, 103, 204, 205, 206});
  CHECK(values(X * Tensor::scalar(2)) == std::vector<double>{2, 4, 6, 8, 10, 12});
  CHECK(values(broadcast_to(row, {2, 3})) == std::vector<double>{10, 20, 30, 10, 20, 30});
}

TEST_CASE("shape errors") {
  const auto A = Tensor::matrix(2, 3, std::vector<double>(6, 1.0));
  const auto B = Tensor::matrix(2, 2, std::vector<double>(4, 1.0));
  CHECK_THROWS_AS(matmul(A, B), DimensionError);
  CHECK_THROWS_AS(A + B, DimensionError);
  CHECK_THROWS_AS(slice(A, 1, 2, 2), DimensionError);
  CHECK_THROWS_AS(concat({A, B}, 0), DimensionError);
  CHECK_THROWS_AS(A.backward(), DimensionError);
  try {
    matmul(A, B);
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("matmul") != std::string::npos);
  }
}

TEST_CASE("backward examples") {
  auto x = Tensor({3}, {1, 2, 3}, true);
  sum(x).backward();
  CHECK(values(Tensor({3}, {x.grad().begin(), x.grad().end()})) == std::vector<double>{1, 1, 1});
  sum(x).backward();
  CHECK(x.grad()[0] == 2.0);
  x.zero_grad();
  auto y = Tensor({2}, {1, 2}, true);
  sum(y * y).backward();
  CHECK(y.grad()[0] == 2.0);
  CHECK(y.grad()[1] == 4.0);
}

TEST_CASE("shared subexpressions accumulate once per path") {
  auto x = Tensor::scalar(3.0, true);
  const auto a = x * x;
  const auto loss = a + a;
  loss.backward();
  CHECK(x.grad()[0] == 12.0);
  x.zero_grad();
  loss.backward();
  CHECK(x.grad()[0] == 12.0);
}

TEST_CASE("no-grad guard and detach") {
  auto x = Tensor::scalar(2.0, true);
  {
    NoGradGuard guard;
    CHECK_FALSE(grad_enabled());
    const auto y = x * x;
    CHECK_FALSE(y.requires_grad());
  }
  CHECK(grad_enabled());
  const auto d = (x * x).detach();
  CHECK_FALSE(d.requires_grad());
  CHECK(d.item() == 4.0);
}

TEST_CASE("gradient check reference cases") {
  Rng rng(1);
  auto x = random_tensor({4, 5}, rng);
  // Exactly linear: any step is exact up to rounding.
  CHECK(gradient_check([](const Tensor& t) { return sum(t); }, x, 20, rng, 1e-3) <= 1e-10);
  CHECK(gradient_check([](const Tensor& t) { return sum(sigmoid(t)); }, x, 20, rng) <= 1e-6);
}

TEST_CASE("gradient check of every op") {
  Rng rng(7);
  const auto W = random_tensor({5, 3}, rng);
  const auto other = random_tensor({4, 5}, rng);
  const auto row = random_tensor({5}, rng);
  const std::vector<int> idx = {4, 0, -1, 2, 2, 1};
  const std::vector<std::function<Tensor(const Tensor&)>> fs = {
      [&](const Tensor& t) { return sum(mul(t, other)); },
      [&](const Tensor& t) { return sum(mul(sub(t, other), add(t, row))); },
      [&](const Tensor& t) { return sum(tanh(matmul(t, W))); },
      [&](const Tensor& t) { return sum(mul(transpose(t), transpose(t))); },
      [&](const Tensor& t) { return mean(exp(scale(t, 0.5))); },
      [&](const Tensor& t) { return sum(log(add_scalar(mul(t, t), 1.0))); },
      [&](const Tensor& t) { return sum(softplus(scale(t, 3.0))); },
      [&](const Tensor& t) { return sum(mul(sum(t, 0), sum(t, 0))); },
      [&](const Tensor& t) { return sum(mul(sum(t, 1), sum(t, 1))); },
      [&](const Tensor& t) { return sum(sigmoid(concat({t, slice(t, 1, 1, 3)}, 1))); },
      [&](const Tensor& t) { return sum(tanh(concat({t, slice(t, 0, 2, 2)}, 0))); },
      [&](const Tensor& t) { return sum(mul(gather_cols(t, idx), gather_cols(t, idx))); },
      [&](const Tensor& t) { return sum(mul(broadcast_to(sum(t, 0), {3, 5}), row)); },
      [&](const Tensor& t) { return sum(relu(add_scalar(t, 0.05))); },
  };
  for (std::size_t i = 0; i < fs.size(); ++i) {
    CAPTURE(i);
    // relu is checked away from its kink.
    auto x = random_tensor({4, 5}, rng);
    if (i + 1 == fs.size()) {
      for (double& v : x.mutable_data()) v = (v >= 0 ? 0.3 : -0.3) + 0.5 * v;
    }
    CHECK(gradient_check(fs[i], x, 20, rng) <= 1e-6);
  }
}

TEST_CASE("three layer MLP parameters pass the finite-difference check") {
  Rng rng(3);
  const auto X = random_tensor({6, 4}, rng);
  const auto target = random_tensor({6, 2}, rng);
  auto W1 = random_tensor({4, 8}, rng), b1 = random_tensor({8}, rng);
  auto W2 = random_tensor({8, 8}, rng), b2 = random_tensor({8}, rng);
  auto W3 = random_tensor({8, 2}, rng), b3 = random_tensor({2}, rng);
  const auto loss = [&] {
    const auto h1 = tanh(matmul(X, W1) + b1);
    const auto h2 = sigmoid(matmul(h1, W2) + b2);
    const auto out = matmul(h2, W3) + b3;
    const auto d = out - target;
    return mean(d * d);
  };
  for (Tensor* p : {&W1, &b1, &W2, &b2, &W3, &b3}) {
    CHECK(gradient_check(loss, *p, 20, rng) <= 1e-4);
    p->set_requires_grad(false);
  }
}

TEST_CASE("sgd and adam") {
  std::vector<double> p = {1.0};
  const std::vector<double> g = {0.5};
  sgd_step(p, g, 0.1);
  CHECK(p[0] == doctest::Approx(0.95));

  std::vector<double> q = {1.0, -2.0}, m(2, 0.0), v(2, 0.0);
  const std::vector<double> zero = {0.0, 0.0};
  adam_step(q, zero, m, v, 1, {});
  CHECK(q == std::vector<double>{1.0, -2.0});

  for (double scale : {1e-3, 1.0, 1e3}) {
    std::vector<double> r = {0.0}, mm = {0.0}, vv = {0.0};
    const std::vector<double> gg = {scale};
    adam_step(r, gg, mm, vv, 1, {});
    CHECK(std::abs(r[0]) == doctest::Approx(1e-3).epsilon(1e-4));
  }
}

TEST_CASE("adam minimises a quadratic and checkpoints round trip") {
  ParamSet params;
  auto w = params.add("w", Tensor({3}, {2.0, -1.0, 0.5}, true));
  AdamConfig cfg;
  cfg.lr = 0.05;
  Adam opt(params, cfg);
  for (int i = 0; i < 400; ++i) {
    params.zero_grad();
    sum(w * w).backward();
    opt.step();
  }
  for (double x : w.data()) CHECK(std::abs(x) < 1e-2);
  CHECK(opt.steps() == 400);
  CHECK(params.scalar_count() == 3);

  const auto ckpt = make_checkpoint("test", params, {{"k", 1}}, 5, &opt);
  CHECK(ckpt["format"] == "bavae-checkpoint");
  ParamSet other;
  auto w2 = other.add("w", Tensor::zeros({3}, true));
  load_params(ckpt, other);
  CHECK(values(w2) == values(w));
  Adam opt2(other, cfg);
  opt2.load_state(ckpt["optimizer"]);
  CHECK(opt2.steps() == 400);
  CHECK(opt2.state() == opt.state());

  ParamSet wrong;
  wrong.add("w", Tensor::zeros({4}, true));
  CHECK_THROWS_AS(load_params(ckpt, wrong), Error);
  ParamSet missing;
  missing.add("v", Tensor::zeros({3}, true));
  CHECK_THROWS_AS(load_params(ckpt, missing), Error);
}

TEST_CASE("tape determinism") {
  const auto run = [] {
    Rng rng(99);
    auto x = random_tensor({5, 5}, rng);
    x.set_requires_grad(true);
    const auto loss = sum(tanh(matmul(x, transpose(x))));
    loss.backward();
    std::vector<double> out = {loss.item()};
    out.insert(out.end(), x.grad().begin(), x.grad().end());
    return out;
  };
  CHECK(run() == run());
}
