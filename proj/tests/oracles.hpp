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

// Slow reference implementations shared by the unit and acceptance tests.
#ifndef BAVAE_TESTS_ORACLES_HPP_
#define BAVAE_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <map>
#include <numeric>
#include <vector>

#include "bavae/graph.hpp"
#include "bavae/rng.hpp"

namespace bavae::oracle {

inline Graph random_graph(int n, double p, Rng& rng) {
  Graph g(n, n);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < p) g.add_edge(u, v);
  return g;
}

// Enumerates every simple path from s and records those that are shortest.
inline void walk(const Graph& g, int t, std::vector<int>& path, std::vector<bool>& on,
                 std::vector<std::vector<int>>& found) {
  const int u = path.back();
  if (u == t) {
    found.push_back(path);
    return;
  }
  for (int v = 0; v < g.n_nodes(); ++v) {
    if (!g.has_edge(u, v) || on[v]) continue;
    on[v] = true;
    path.push_back(v);
    walk(g, t, path, on, found);
    path.pop_back();
    on[v] = false;
  }
}

inline std::vector<double> brute_betweenness(const Graph& g) {
  const int n = g.n_nodes();
  std::vector<double> bc(n, 0.0);
  for (int s = 0; s < n; ++s) {
    for (int t = s + 1; t < n; ++t) {
      std::vector<int> path = {s};
      std::vector<bool> on(n, false);
      on[s] = true;
      std::vector<std::vector<int>> all;
      walk(g, t, path, on, all);
      if (all.empty()) continue;
      std::size_t best = SIZE_MAX;
      for (const auto& p : all) best = std::min(best, p.size());
      std::vector<double> through(n, 0.0);
      double count = 0;
      for (const auto& p : all) {
        if (p.size() != best) continue;
        count += 1;
        for (std::size_t i = 1; i + 1 < p.size(); ++i) through[p[i]] += 1;
      }
      for (int v = 0; v < n; ++v) bc[v] += through[v] / count;
    }
  }
  return bc;
}

inline double brute_clustering(const Graph& g) {
  const int n = g.n_nodes();
  double acc = 0;
  for (int v = 0; v < n; ++v) {
    std::vector<int> nb;
    for (int u = 0; u < n; ++u)
      if (g.has_edge(u, v)) nb.push_back(u);
    const double k = static_cast<double>(nb.size());
    if (k < 2) continue;
    double closed = 0;
    for (std::size_t a = 0; a < nb.size(); ++a)
      for (std::size_t b = a + 1; b < nb.size(); ++b) closed += g.has_edge(nb[a], nb[b]);
    acc += closed / (k * (k - 1) / 2);
  }
  return acc / n;
}

// Least-squares slope of log CCDF against log degree, ignoring the last
// 0.1% of the tail.
inline double ccdf_slope(const std::vector<int>& degrees) {
  std::map<int, int> hist;
  for (int d : degrees) ++hist[d];
  std::vector<double> xs, ys;
  double remaining = static_cast<double>(degrees.size());
  for (auto [d, c] : hist) {
    if (remaining / degrees.size() < 1e-3) break;
    xs.push_back(std::log(static_cast<double>(d)));
    ys.push_back(std::log(remaining / degrees.size()));
    remaining -= c;
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace bavae::oracle

#endif  // BAVAE_TESTS_ORACLES_HPP_
