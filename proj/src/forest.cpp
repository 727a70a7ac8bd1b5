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

#include "bavae/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "bavae/error.hpp"
#include "bavae/rng.hpp"

namespace bavae::forest {

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  std::size_t left_count = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, std::span<const double> y,
              const ForestConfig& cfg, int mtry, Rng& rng)
      : X_(X), y_(y), cfg_(cfg), mtry_(mtry), rng_(rng) {}

  Tree build(std::vector<std::size_t> rows) {
    Tree tree;
    tree.nodes.emplace_back();
    grow(tree, 0, rows, 0);
    return tree;
  }

 private:
  void grow(Tree& tree, int node, std::vector<std::size_t>& rows, int depth) {
    double sum = 0.0, sumsq = 0.0;
    for (auto r : rows) {
      sum += y_[r];
      sumsq += y_[r] * y_[r];
    }
    const double count = static_cast<double>(rows.size());
    tree.nodes[node].value = sum / count;
    const double sse = sumsq - sum * sum / count;

    const bool depth_ok = cfg_.max_depth <= 0 || depth < cfg_.max_depth;
    if (!depth_ok || rows.size() < 2 * static_cast<std::size_t>(cfg_.min_leaf) ||
        sse <= 1e-12 * std::max(1.0, sumsq)) {
      return;
    }
    const Split best = find_split(rows);
    if (best.feature < 0) return;

    auto mid = std::partition(rows.begin(), rows.end(), [&](std::size_t r) {
      return X_.data[r * X_.cols + best.feature] <= best.threshold;
    });
    std::vector<std::size_t> left(rows.begin(), mid), right(mid, rows.end());
    rows.clear();
    rows.shrink_to_fit();

    const int l = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int r = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    auto& n = tree.nodes[node];
    n.feature = best.feature;
    n.threshold = best.threshold;
    n.gain = best.gain;
    n.left = l;
    n.right = r;
    grow(tree, l, left, depth + 1);
    grow(tree, r, right, depth + 1);
  }

  // Visits features in random order until `mtry` non-constant ones have been
  // scored (or all are exhausted).
  Split find_split(const std::vector<std::size_t>& rows) {
    const std::size_t width = X_.cols;
    std::vector<int> order(width);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = width; i > 1; --i) {
      std::swap(order[i - 1], order[rng_.uniform_int(0, static_cast<std::int64_t>(i) - 1)]);
    }

    Split best;
    const std::size_t n = rows.size();
    const auto min_leaf = static_cast<std::size_t>(cfg_.min_leaf);
    double total = 0.0;
    for (auto r : rows) total += y_[r];

    std::vector<std::pair<double, double>> xy(n);
    int scored = 0;
    for (int f : order) {
      if (scored >= mtry_) break;
      for (std::size_t i = 0; i < n; ++i) {
        xy[i] = {X_.data[rows[i] * width + f], y_[rows[i]]};
      }
      std::sort(xy.begin(), xy.end());
      if (xy.front().first == xy.back().first) continue;
      ++scored;

      // SSE decrease = sL^2/nL + sR^2/nR - s^2/n.
      const double base = total * total / static_cast<double>(n);
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += xy[i].second;
        const std::size_t nl = i + 1;
        if (xy[i].first == xy[i + 1].first) continue;
        if (nl < min_leaf || n - nl < min_leaf) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(nl) +
                            right_sum * right_sum / static_cast<double>(n - nl) -
                            base;
        if (gain > best.gain) {
          best.gain = gain;
          best.feature = f;
          best.threshold = 0.5 * (xy[i].first + xy[i + 1].first);
          // Adjacent doubles: the midpoint may round up onto the right value.
          if (best.threshold >= xy[i + 1].first) best.threshold = xy[i].first;
          best.left_count = nl;
        }
      }
    }
    return best;
  }

  const Matrix& X_;
  std::span<const double> y_;
  const ForestConfig& cfg_;
  int mtry_;
  Rng& rng_;
};

Tree fit_tree(const Matrix& X, std::span<const double> y,
              const ForestConfig& cfg, int mtry, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> rows(X.rows);
  if (cfg.bootstrap) {
    for (auto& r : rows) {
      r = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(X.rows) - 1));
    }
  } else {
    std::iota(rows.begin(), rows.end(), 0);
  }
  TreeBuilder builder(X, y, cfg, mtry, rng);
  return builder.build(std::move(rows));
}

int depth_from(const Tree& t, int node) {
  const auto& n = t.nodes[node];
  if (n.is_leaf()) return 0;
  return 1 + std::max(depth_from(t, n.left), depth_from(t, n.right));
}

}  // namespace

double Tree::predict(std::span<const double> x) const {
  int node = 0;
  while (!nodes[node].is_leaf()) {
    const auto& n = nodes[node];
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[node].value;
}

int Tree::depth() const { return nodes.empty() ? 0 : depth_from(*this, 0); }

double ForestModel::predict(std::span<const double> x) const {
  if (x.size() != width) {
    throw DimensionError("forest predict: expected " + std::to_string(width) +
                         " features, got " + std::to_string(x.size()));
  }
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

std::vector<double> ForestModel::predict(const Matrix& X) const {
  std::vector<double> out(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) out[i] = predict(X.row(i));
  return out;
}

std::vector<double> ForestModel::feature_importance() const {
  std::vector<double> imp(width, 0.0);
  for (const auto& t : trees) {
    for (const auto& n : t.nodes) {
      if (!n.is_leaf()) imp[n.feature] += n.gain;
    }
  }
  const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
  if (total > 0.0) {
    for (double& v : imp) v /= total;
  }
  return imp;
}

ForestModel fit(const Matrix& X, std::span<const double> y,
                const ForestConfig& config, std::string target_name) {
  if (X.rows < 2 || X.rows != y.size()) {
    throw_invalid("forest fit: need matching X/y with at least 2 rows");
  }
  if (X.cols == 0 || X.data.size() != X.rows * X.cols) {
    throw_invalid("forest fit: malformed design matrix");
  }
  if (config.n_trees < 1 || config.min_leaf < 1) {
    throw_invalid("forest fit: n_trees and min_leaf must be >= 1");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw_invalid("forest fit: non-finite target");
  }
  for (double v : X.data) {
    if (!std::isfinite(v)) throw_invalid("forest fit: non-finite feature");
  }

  ForestModel model;
  model.config = config;
  model.target_name = std::move(target_name);
  model.width = X.cols;
  model.trees.resize(config.n_trees);
  const int mtry = config.features_per_split > 0
                       ? std::min<int>(config.features_per_split, X.cols)
                       : static_cast<int>((X.cols + 2) / 3);

  auto work = [&](int t) {
    model.trees[t] = fit_tree(X, y, config, mtry,
                              derive_seed(config.seed, static_cast<std::uint64_t>(t)));
  };
  const int jobs = std::clamp(config.jobs, 1, config.n_trees);
  if (jobs == 1) {
    for (int t = 0; t < config.n_trees; ++t) work(t);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&, w] {
        for (int t = w; t < config.n_trees; t += jobs) work(t);
      });
    }
    for (auto& th : pool) th.join();
  }
  return model;
}

nlohmann::json to_json(const ForestModel& model) {
  using nlohmann::json;
  json trees = json::array();
  for (const auto& t : model.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) {
        nodes.push_back({{"value", n.value}});
      } else {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value},
                         {"gain", n.gain}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  const auto& c = model.config;
  return json{{"target", model.target_name},
              {"width", model.width},
              {"config",
               {{"n_trees", c.n_trees},
                {"max_depth", c.max_depth},
                {"min_leaf", c.min_leaf},
                {"features_per_split", c.features_per_split},
                {"bootstrap", c.bootstrap},
                {"seed", c.seed}}},
              {"trees", std::move(trees)}};
}

ForestModel from_json(const nlohmann::json& j) {
  ForestModel model;
  try {
    model.target_name = j.at("target").get<std::string>();
    model.width = j.at("width").get<std::size_t>();
    const auto& c = j.at("config");
    model.config.n_trees = c.at("n_trees").get<int>();
    model.config.max_depth = c.at("max_depth").get<int>();
    model.config.min_leaf = c.at("min_leaf").get<int>();
    model.config.features_per_split = c.at("features_per_split").get<int>();
    model.config.bootstrap = c.at("bootstrap").get<bool>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    for (const auto& jt : j.at("trees")) {
      Tree t;
      for (const auto& jn : jt) {
        TreeNode n;
        n.value = jn.at("value").get<double>();
        if (jn.contains("feature")) {
          n.feature = jn.at("feature").get<int>();
          n.threshold = jn.at("threshold").get<double>();
          n.left = jn.at("left").get<int>();
          n.right = jn.at("right").get<int>();
          n.gain = jn.at("gain").get<double>();
        }
        t.nodes.push_back(n);
      }
      model.trees.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("forest model: ") + e.what());
  }
  if (model.trees.empty()) throw Error(ErrorCode::kParse, "forest model: no trees");
  return model;
}

}  // namespace bavae::forest
