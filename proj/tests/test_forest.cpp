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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bavae/error.hpp"
#include "bavae/experiments.hpp"
#include "bavae/features.hpp"
#include "bavae/forest.hpp"
#include "bavae/rng.hpp"

using namespace bavae;
using namespace bavae::forest;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix X{rows, cols, {}};
  for (std::size_t i = 0; i < rows * cols; ++i) X.data.push_back(rng.uniform());
  return X;
}

std::vector<double> column(const Matrix& X, std::size_t c) {
  std::vector<double> out;
  for (std::size_t r = 0; r < X.rows; ++r) out.push_back(X.data[r * X.cols + c]);
  return out;
}

std::pair<double, double> leaf_range(const ForestModel& m) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& t : m.trees)
    for (const auto& nd : t.nodes)
      if (nd.is_leaf()) {
        lo = std::min(lo, nd.value);
        hi = std::max(hi, nd.value);
      }
  return {lo, hi};
}

}  // namespace

TEST_CASE("constant target") {
  Rng rng(1);
  const auto X = random_matrix(50, 4, rng);
  const std::vector<double> y(50, 3.25);
  ForestConfig cfg;
  cfg.n_trees = 10;
  const auto m = fit(X, y, cfg);
  for (std::size_t r = 0; r < X.rows; ++r) CHECK(m.predict(X.row(r)) == 3.25);
  const auto imp = m.feature_importance();
  for (double v : imp) CHECK(v == 0.0);
}

TEST_CASE("identity fit with a single unbagged tree") {
  Rng rng(2);
  const auto X = random_matrix(256, 3, rng);
  const auto y = column(X, 0);
  ForestConfig cfg;
  cfg.n_trees = 1;
  cfg.bootstrap = false;
  cfg.min_leaf = 1;
  cfg.max_depth = 16;
  cfg.features_per_split = 3;
  const auto m = fit(X, y, cfg);
  double mse = 0;
  for (std::size_t r = 0; r < X.rows; ++r) mse += std::pow(m.predict(X.row(r)) - y[r], 2);
  CHECK(mse / X.rows < 1e-6);
  const auto imp = m.feature_importance();
  CHECK(imp[0] > 0.9);
  CHECK(std::accumulate(imp.begin(), imp.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m.trees[0].depth() <= 16);
}

TEST_CASE("max depth is respected") {
  Rng rng(3);
  const auto X = random_matrix(200, 2, rng);
  const auto y = column(X, 1);
  ForestConfig cfg;
  cfg.n_trees = 5;
  cfg.max_depth = 3;
  const auto m = fit(X, y, cfg);
  for (const auto& t : m.trees) CHECK(t.depth() <= 3);
}

TEST_CASE("predictions stay within the leaf range and are deterministic") {
  Rng rng(4);
  const auto X = random_matrix(120, 5, rng);
  std::vector<double> y;
  for (std::size_t r = 0; r < X.rows; ++r) y.push_back(std::sin(6 * X.data[r * 5]) + X.data[r * 5 + 2]);
  ForestConfig cfg;
  cfg.n_trees = 25;
  cfg.seed = 9;
  const auto a = fit(X, y, cfg);
  cfg.jobs = 3;
  const auto b = fit(X, y, cfg);
  CHECK(to_json(a) == to_json(b));
  const auto [lo, hi] = leaf_range(a);
  const auto probe = random_matrix(200, 5, rng);
  for (std::size_t r = 0; r < probe.rows; ++r) {
    const double p = a.predict(probe.row(r));
    CHECK(p >= lo);
    CHECK(p <= hi);
  }
  cfg.seed = 10;
  CHECK_FALSE(to_json(fit(X, y, cfg)) == to_json(a));
}

TEST_CASE("leaf-only and duplicate-tree forests") {
  ForestModel leaf;
  leaf.width = 2;
  leaf.trees.push_back(Tree{{TreeNode{-1, 0, -1, -1, 2.5, 0}}});
  const std::vector<double> x = {0.1, 0.2};
  CHECK(leaf.predict(x) == 2.5);
  for (double v : leaf.feature_importance()) CHECK(v == 0.0);

  Rng rng(5);
  const auto X = random_matrix(60, 2, rng);
  const auto y = column(X, 0);
  ForestConfig cfg;
  cfg.n_trees = 1;
  auto one = fit(X, y, cfg);
  auto many = one;
  many.trees.push_back(one.trees[0]);
  many.trees.push_back(one.trees[0]);
  for (std::size_t r = 0; r < X.rows; ++r) CHECK(many.predict(X.row(r)) == doctest::Approx(one.predict(X.row(r))));
}

TEST_CASE("monotone data gives monotone predictions") {
  Matrix X{100, 2, {}};
  std::vector<double> y;
  for (int i = 0; i < 100; ++i) {
    X.data.push_back(i);
    X.data.push_back(1.0);
    y.push_back(2.0 * i);
  }
  ForestConfig cfg;
  cfg.n_trees = 1;
  cfg.bootstrap = false;
  cfg.features_per_split = 2;
  const auto m = fit(X, y, cfg);
  double prev = -INFINITY;
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> x = {static_cast<double>(i), 1.0};
    const double p = m.predict(x);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("adding trees moves predictions by at most the tree range") {
  Rng rng(6);
  const auto X = random_matrix(80, 3, rng);
  const auto y = column(X, 2);
  ForestConfig cfg;
  cfg.n_trees = 10;
  const auto small = fit(X, y, cfg);
  cfg.n_trees = 20;
  const auto big = fit(X, y, cfg);
  const auto [lo, hi] = leaf_range(big);
  for (std::size_t r = 0; r < X.rows; ++r) {
    CHECK(std::abs(big.predict(X.row(r)) - small.predict(X.row(r))) <= hi - lo);
  }
}

TEST_CASE("errors and serialization") {
  Matrix X{1, 2, {0.0, 1.0}};
  const std::vector<double> one = {1.0};
  CHECK_THROWS_AS(fit(X, one, {}), Error);
  Matrix X2{2, 2, {0.0, 1.0, 2.0, 3.0}};
  const std::vector<double> nan = {1.0, NAN};
  CHECK_THROWS_AS(fit(X2, nan, {}), Error);
  const std::vector<double> ok = {1.0, 2.0};
  ForestConfig cfg;
  cfg.n_trees = 3;
  const auto m = fit(X2, ok, cfg, "alpha");
  const std::vector<double> wrong = {1.0};
  CHECK_THROWS_AS(m.predict(wrong), DimensionError);
  const auto back = from_json(to_json(m));
  CHECK(to_json(back) == to_json(m));
  CHECK(back.target_name == "alpha");
  CHECK_THROWS_AS(from_json(nlohmann::json{{"trees", 3}}), Error);
}

TEST_CASE("alpha regression beats the mean predictor") {
  const auto train = generate_dataset(experiments::supervised_spec("uniform_0_3", 600, 50, 1));
  const auto test = generate_dataset(experiments::supervised_spec("uniform_0_3", 200, 50, 2));
  ForestConfig cfg;
  cfg.n_trees = 60;
  const auto X = experiments::feature_matrix(train);
  std::vector<double> y;
  for (const auto& it : train.items) y.push_back(it.params.alpha);
  const auto m = fit(X, y, cfg, "alpha");
  std::vector<double> truth, pred;
  for (const auto& it : test.items) {
    truth.push_back(it.params.alpha);
    pred.push_back(m.predict(features::extract_features(it.graph)));
  }
  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / truth.size();
  double var = 0, mse = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    var += std::pow(truth[i] - mean, 2);
    mse += std::pow(truth[i] - pred[i], 2);
  }
  CHECK(mse < var);
}
