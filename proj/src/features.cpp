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

#include "bavae/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "bavae/csv.hpp"
#include "bavae/error.hpp"

namespace bavae::features {

namespace {

std::vector<std::vector<int>> adjacency_lists(const Graph& g) {
  std::vector<std::vector<int>> out(g.n_nodes());
  for (int u = 0; u < g.n_nodes(); ++u) {
    for (int v = 0; v < g.n_nodes(); ++v) {
      if (g.has_edge(u, v)) out[u].push_back(v);
    }
  }
  return out;
}

// Linear interpolation between closest ranks on sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

}  // namespace

double population_std(const std::vector<double>& xs) {
  const double mu = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

DegreeStats degree_stats(const Graph& g) {
  if (g.n_nodes() < 1) throw_invalid("degree_stats: empty graph");
  const auto deg = g.degrees();
  std::vector<double> d(deg.begin(), deg.end());
  std::sort(d.begin(), d.end());
  DegreeStats s;
  s.mean = mean_of(d);
  s.std = population_std(d);
  s.max = d.back();
  s.q25 = quantile(d, 0.25);
  s.q50 = quantile(d, 0.50);
  s.q75 = quantile(d, 0.75);
  return s;
}

namespace {

// Sum of a sorted copy: the result depends only on the multiset of terms.
double canonical_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc;
}

}  // namespace

std::vector<double> betweenness(const Graph& g) {
  const int n = g.n_nodes();
  const auto adj = adjacency_lists(g);
  std::vector<int> dist(n), order;
  std::vector<double> sigma(n), delta(n), terms;
  // per_source[v] collects delta_s(v) over sources s.
  std::vector<std::vector<double>> per_source(n);
  order.reserve(n);

  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    order.clear();

    dist[s] = 0;
    sigma[s] = 1.0;
    order.push_back(s);
    // `order` doubles as the BFS queue; it ends up sorted by distance.
    for (std::size_t head = 0; head < order.size(); ++head) {
      const int v = order[head];
      for (int w : adj[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          order.push_back(w);
        }
        if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
      }
    }
    // Successor terms are summed in sorted order.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int v = *it;
      terms.clear();
      for (int w : adj[v]) {
        if (dist[w] == dist[v] + 1) terms.push_back(sigma[v] / sigma[w] * (1.0 + delta[w]));
      }
      delta[v] = canonical_sum(terms);
      if (v != s && delta[v] != 0.0) per_source[v].push_back(delta[v]);
    }
  }
  std::vector<double> bc(n, 0.0);
  // Every unordered pair was accumulated from both endpoints.
  for (int v = 0; v < n; ++v) bc[v] = 0.5 * canonical_sum(per_source[v]);
  return bc;
}

double clustering_mean(const Graph& g) {
  const int n = g.n_nodes();
  if (n == 0) return 0.0;
  const auto adj = adjacency_lists(g);
  std::vector<double> local(n, 0.0);
  for (int v = 0; v < n; ++v) {
    const auto& nb = adj[v];
    const auto k = nb.size();
    if (k < 2) continue;
    std::size_t links = 0;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) links += g.has_edge(nb[a], nb[b]);
    }
    local[v] = 2.0 * static_cast<double>(links) / static_cast<double>(k * (k - 1));
  }
  // Sorted so the sum does not depend on node labels.
  std::sort(local.begin(), local.end());
  return mean_of(local);
}

double degree_assortativity(const Graph& g) {
  const auto deg = g.degrees();
  const auto edges = g.edges();
  if (edges.empty()) return 0.0;
  // Each edge contributes both orientations, so x and y share moments.
  double sx = 0, sxx = 0, sxy = 0;
  for (auto [u, v] : edges) {
    const double a = deg[u], b = deg[v];
    sx += a + b;
    sxx += a * a + b * b;
    sxy += 2.0 * a * b;
  }
  const double cnt = 2.0 * static_cast<double>(edges.size());
  const double mean = sx / cnt;
  const double var = sxx / cnt - mean * mean;
  if (var <= 1e-12 * std::max(1.0, mean * mean)) return 0.0;
  return (sxy / cnt - mean * mean) / var;
}

FeatureVector extract_features(const Graph& g) {
  if (g.n_nodes() < 2) throw_invalid("extract_features: need >= 2 nodes");
  const auto ds = degree_stats(g);
  auto bc = betweenness(g);
  std::sort(bc.begin(), bc.end());
  FeatureVector f{};
  f[0] = g.n_nodes();
  f[1] = static_cast<double>(g.edge_count());
  f[2] = ds.mean;
  f[3] = ds.std;
  f[4] = ds.max;
  f[5] = ds.q25;
  f[6] = ds.q50;
  f[7] = ds.q75;
  f[8] = clustering_mean(g);
  f[9] = mean_of(bc);
  f[10] = population_std(bc);
  f[11] = bc.back();
  f[12] = degree_assortativity(g);
  return f;
}

void write_feature_csv(std::ostream& os, const Dataset& ds) {
  os << "id,n,m,alpha";
  for (auto name : kFeatureNames) os << ',' << name;
  os << '\n';
  for (const auto& item : ds.items) {
    const auto f = extract_features(item.graph);
    os << item.id << ',' << item.params.n << ',' << item.params.m << ','
       << csv::num(item.params.alpha);
    for (double x : f) os << ',' << csv::num(x);
    os << '\n';
  }
}

}  // namespace bavae::features
