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

#ifndef BAVAE_FEATURES_HPP_
#define BAVAE_FEATURES_HPP_

#include <array>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "bavae/dataset.hpp"
#include "bavae/graph.hpp"

namespace bavae::features {

struct DegreeStats {
  double mean = 0;
  double std = 0;  // population (1/N)
  double max = 0;
  double q25 = 0;
  double q50 = 0;
  double q75 = 0;
};

DegreeStats degree_stats(const Graph& g);

// Brandes accumulation over BFS shortest-path DAGs. Unnormalised; each
// unordered source/target pair is counted once.
std::vector<double> betweenness(const Graph& g);

// Mean local clustering over live nodes; degree < 2 contributes 0.
double clustering_mean(const Graph& g);

// Newman degree assortativity; 0 when the end-degree variance vanishes.
double degree_assortativity(const Graph& g);

inline constexpr std::size_t kFeatureCount = 13;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "n_nodes",        "edge_count",       "degree_mean",
    "degree_std",     "degree_max",       "degree_q25",
    "degree_q50",     "degree_q75",       "clustering_coefficient_mean",
    "betweenness_mean", "betweenness_std", "betweenness_max",
    "degree_assortativity"};

using FeatureVector = std::array<double, kFeatureCount>;

FeatureVector extract_features(const Graph& g);

// Population mean / std / max of a sample (helpers shared with assessment).
double population_std(const std::vector<double>& xs);

// Header: id,n,m,alpha,<feature names>.
void write_feature_csv(std::ostream& os, const Dataset& ds);

}  // namespace bavae::features

#endif  // BAVAE_FEATURES_HPP_
