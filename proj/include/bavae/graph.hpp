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

#ifndef BAVAE_GRAPH_HPP_
#define BAVAE_GRAPH_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "bavae/rng.hpp"

namespace bavae {

// Undirected simple graph stored as a dense n_max x n_max {0,1} matrix.
// Rows and columns at or beyond n_nodes are zero padding, so graphs of
// different sizes share one fixed adjacency shape.
class Graph {
 public:
  Graph() = default;
  Graph(int n_nodes, int n_max);

  int n_nodes() const { return n_nodes_; }
  int n_max() const { return n_max_; }

  bool has_edge(int u, int v) const {
    return adj_[static_cast<std::size_t>(u) * n_max_ + v] != 0;
  }
  void add_edge(int u, int v);

  int degree(int v) const;
  std::vector<int> degrees() const;  // live nodes only
  std::size_t edge_count() const;
  // Sorted (u, v) pairs with u < v.
  std::vector<std::pair<int, int>> edges() const;
  std::span<const std::uint8_t> adjacency() const { return adj_; }

  // Same graph in a larger (or smaller, if still >= n_nodes) padding.
  Graph padded(int n_max) const;
  // Node v of this graph becomes node perm[v] in the result.
  Graph permuted(std::span<const int> perm) const;

  // Symmetry, zero diagonal, zero padding.
  bool check_invariants() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  int n_nodes_ = 0;
  int n_max_ = 0;
  std::vector<std::uint8_t> adj_;
};

struct BAParams {
  int n = 2;
  int m = 1;
  double alpha = 1.0;

  void validate() const;
  friend bool operator==(const BAParams&, const BAParams&) = default;
};

struct ERParams {
  int n = 1;
  double p = 0.0;

  void validate() const;
};

// Draws `m` distinct indices, each from p(i) = k_i^alpha / sum_j k_j^alpha
// renormalised over the indices not chosen yet. Zero-degree entries are not
// candidates. Throws InfeasibleError if fewer than m candidates exist.
std::vector<int> sample_targets(std::span<const int> degrees, double alpha,
                                int m, Rng& rng);

// Non-linear Barabasi-Albert growth. Nodes 0..m-1 are unconnected seeds,
// node m attaches to every seed, and each later node attaches to m existing
// nodes via sample_targets on the degrees frozen at the start of its step.
// The result has exactly m * (n - m) edges. n_max = 0 means n_max = n.
Graph generate_ba(const BAParams& params, std::uint64_t seed, int n_max = 0);

Graph generate_er(const ERParams& params, std::uint64_t seed, int n_max = 0);

void write_edge_list(std::ostream& os, const Graph& g);
void write_dot(std::ostream& os, const Graph& g, const char* name = "G");

}  // namespace bavae

#endif  // BAVAE_GRAPH_HPP_
