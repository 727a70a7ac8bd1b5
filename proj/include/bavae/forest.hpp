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

#ifndef BAVAE_FOREST_HPP_
#define BAVAE_FOREST_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace bavae::forest {

struct ForestConfig {
  int n_trees = 200;
  int max_depth = 0;           // 0 = unbounded
  int min_leaf = 2;
  int features_per_split = 0;  // 0 = ceil(width / 3)
  bool bootstrap = true;
  std::uint64_t seed = 0;
  int jobs = 1;
};

// Flat tree node. feature < 0 marks a leaf.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  // Weighted SSE decrease of this split (0 for leaves).
  double gain = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
  int depth() const;
};

// Row-major design matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }
};

struct ForestModel {
  std::vector<Tree> trees;
  ForestConfig config;
  std::string target_name;
  std::size_t width = 0;

  double predict(std::span<const double> x) const;
  std::vector<double> predict(const Matrix& X) const;
  // Mean impurity decrease per feature, normalised to sum 1 (all zeros when
  // no tree has a split).
  std::vector<double> feature_importance() const;
};

ForestModel fit(const Matrix& X, std::span<const double> y,
                const ForestConfig& config, std::string target_name = "y");

nlohmann::json to_json(const ForestModel& model);
ForestModel from_json(const nlohmann::json& j);

}  // namespace bavae::forest

#endif  // BAVAE_FOREST_HPP_
