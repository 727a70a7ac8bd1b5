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

#include "bavae/graph.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "bavae/error.hpp"

namespace bavae {

Graph::Graph(int n_nodes, int n_max)
    : n_nodes_(n_nodes), n_max_(n_max) {
  if (n_nodes < 0 || n_max < n_nodes) {
    throw_invalid("graph: need 0 <= n_nodes <= n_max, got n_nodes=" +
                  std::to_string(n_nodes) + " n_max=" + std::to_string(n_max));
  }
  adj_.assign(static_cast<std::size_t>(n_max) * n_max, 0);
}

void Graph::add_edge(int u, int v) {
  if (u == v || u < 0 || v < 0 || u >= n_nodes_ || v >= n_nodes_) {
    throw_invalid("graph: invalid edge (" + std::to_string(u) + ", " +
                  std::to_string(v) + ")");
  }
  adj_[static_cast<std::size_t>(u) * n_max_ + v] = 1;
  adj_[static_cast<std::size_t>(v) * n_max_ + u] = 1;
}

int Graph::degree(int v) const {
  const auto* row = adj_.data() + static_cast<std::size_t>(v) * n_max_;
  return std::accumulate(row, row + n_nodes_, 0);
}

std::vector<int> Graph::degrees() const {
  std::vector<int> out(n_nodes_);
  for (int v = 0; v < n_nodes_; ++v) out[v] = degree(v);
  return out;
}

std::size_t Graph::edge_count() const {
  std::size_t total = 0;
  for (int u = 0; u < n_nodes_; ++u) {
    for (int v = u + 1; v < n_nodes_; ++v) total += has_edge(u, v);
  }
  return total;
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < n_nodes_; ++u) {
    for (int v = u + 1; v < n_nodes_; ++v) {
      if (has_edge(u, v)) out.emplace_back(u, v);
    }
  }
  return out;
}

Graph Graph::padded(int n_max) const {
  Graph out(n_nodes_, n_max);
  for (auto [u, v] : edges()) out.add_edge(u, v);
  return out;
}

Graph Graph::permuted(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != n_nodes_) {
    throw_invalid("graph: permutation length mismatch");
  }
  Graph out(n_nodes_, n_max_);
  for (auto [u, v] : edges()) out.add_edge(perm[u], perm[v]);
  return out;
}

bool Graph::check_invariants() const {
  if (adj_.size() != static_cast<std::size_t>(n_max_) * n_max_) return false;
  for (int i = 0; i < n_max_; ++i) {
    for (int j = 0; j < n_max_; ++j) {
      const auto a = adj_[static_cast<std::size_t>(i) * n_max_ + j];
      if (a > 1) return false;
      if (a != adj_[static_cast<std::size_t>(j) * n_max_ + i]) return false;
      if (i == j && a != 0) return false;
      if ((i >= n_nodes_ || j >= n_nodes_) && a != 0) return false;
    }
  }
  return true;
}

void BAParams::validate() const {
  if (n < 2 || m < 1 || m >= n || !(alpha > 0.0) || !std::isfinite(alpha)) {
    throw_invalid("BA params: need n >= 2, 1 <= m < n, alpha > 0; got n=" +
                  std::to_string(n) + " m=" + std::to_string(m) +
                  " alpha=" + std::to_string(alpha));
  }
}

void ERParams::validate() const {
  if (n < 1 || !(p >= 0.0 && p <= 1.0)) {
    throw_invalid("ER params: need n >= 1 and p in [0, 1]");
  }
}

std::vector<int> sample_targets(std::span<const int> degrees, double alpha,
                                int m, Rng& rng) {
  std::vector<double> weight(degrees.size(), 0.0);
  int candidates = 0;
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    if (degrees[i] > 0) {
      weight[i] = std::pow(static_cast<double>(degrees[i]), alpha);
      ++candidates;
    }
  }
  if (candidates < m) {
    throw InfeasibleError("sample_targets: " + std::to_string(candidates) +
                          " candidates for " + std::to_string(m) + " targets");
  }
  std::vector<int> chosen;
  chosen.reserve(m);
  for (int draw = 0; draw < m; ++draw) {
    // Summed afresh each draw.
    const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
    const double u = rng.uniform() * total;
    double cumulative = 0.0;
    int pick = -1;
    for (std::size_t i = 0; i < weight.size(); ++i) {
      if (weight[i] <= 0.0) continue;
      pick = static_cast<int>(i);
      cumulative += weight[i];
      if (u < cumulative) break;
    }
    chosen.push_back(pick);
    weight[pick] = 0.0;
  }
  return chosen;
}

Graph generate_ba(const BAParams& params, std::uint64_t seed, int n_max) {
  params.validate();
  const int n = params.n;
  const int m = params.m;
  Graph g(n, n_max == 0 ? n : n_max);
  Rng rng(seed);

  for (int s = 0; s < m; ++s) g.add_edge(m, s);
  std::vector<int> degree(n, 0);
  for (int s = 0; s < m; ++s) degree[s] = 1;
  degree[m] = m;

  for (int t = m + 1; t < n; ++t) {
    const auto targets =
        sample_targets(std::span<const int>(degree.data(), t), params.alpha,
                       m, rng);
    for (int v : targets) {
      g.add_edge(t, v);
      ++degree[v];
    }
    degree[t] = m;
  }
  return g;
}

Graph generate_er(const ERParams& params, std::uint64_t seed, int n_max) {
  params.validate();
  Graph g(params.n, n_max == 0 ? params.n : n_max);
  Rng rng(seed);
  for (int u = 0; u < params.n; ++u) {
    for (int v = u + 1; v < params.n; ++v) {
      if (rng.uniform() < params.p) g.add_edge(u, v);
    }
  }
  return g;
}

void write_edge_list(std::ostream& os, const Graph& g) {
  os << "# nodes " << g.n_nodes() << "\n";
  for (auto [u, v] : g.edges()) os << u << ' ' << v << '\n';
}

void write_dot(std::ostream& os, const Graph& g, const char* name) {
  os << "graph " << name << " {\n";
  const auto deg = g.degrees();
  for (int v = 0; v < g.n_nodes(); ++v) {
    os << "  " << v << " [degree=" << deg[v] << "];\n";
  }
  for (auto [u, v] : g.edges()) os << "  " << u << " -- " << v << ";\n";
  os << "}\n";
}

}  // namespace bavae
