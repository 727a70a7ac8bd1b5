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
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "bavae/dataset.hpp"
#include "bavae/error.hpp"
#include "bavae/graph.hpp"
#include "bavae/rng.hpp"
#include "oracles.hpp"

using namespace bavae;
using bavae::oracle::ccdf_slope;

namespace {

// Probability that index `target` is among m draws without replacement,
// by exhaustive enumeration of ordered draw sequences.
double inclusion_probability(const std::vector<double>& w, int m, int target,
                             std::vector<bool>& used, double p = 1.0) {
  if (m == 0) return used[target] ? p : 0.0;
  double total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!used[i]) total += w[i];
  }
  double acc = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (used[i] || w[i] == 0) continue;
    used[i] = true;
    acc += inclusion_probability(w, m - 1, target, used, p * w[i] / total);
    used[i] = false;
  }
  return acc;
}

}  // namespace

TEST_CASE("rng transforms") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng r(1);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto x = r.uniform_int(-2, 3);
    CHECK(x >= -2);
    CHECK(x <= 3);
    seen.insert(x);
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(seen.size() == 6);
  CHECK(derive_seed(7, 0) != derive_seed(7, 1));
  CHECK(derive_seed(7, 0) != derive_seed(8, 0));
}

TEST_CASE("sample_targets forced and symmetric cases") {
  Rng rng(3);
  const std::vector<int> two = {1, 1};
  auto t = sample_targets(two, 1.0, 2, rng);
  std::sort(t.begin(), t.end());
  CHECK(t == std::vector<int>{0, 1});

  const std::vector<int> flat = {2, 2, 2};
  std::array<int, 3> counts{};
  const int draws = 30000;
  for (int i = 0; i < draws; ++i) ++counts[sample_targets(flat, 0.5, 1, rng)[0]];
  const double se = std::sqrt(draws * (1.0 / 3) * (2.0 / 3));
  for (int c : counts) CHECK(std::abs(c - draws / 3.0) < 4 * se);
}

TEST_CASE("sample_targets first draw follows the attachment kernel") {
  Rng rng(11);
  const std::vector<int> degrees = {3, 1, 1, 1};
  int hits = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) hits += sample_targets(degrees, 1.0, 1, rng)[0] == 0;
  const double p = 0.5;
  CHECK(std::abs(hits - p * draws) < 3 * std::sqrt(draws * p * (1 - p)));
}

TEST_CASE("sample_targets without replacement matches enumeration") {
  Rng rng(5);
  const std::vector<int> degrees = {3, 1, 2, 1};
  const double alpha = 1.5;
  std::vector<double> w;
  for (int d : degrees) w.push_back(std::pow(d, alpha));
  const int draws = 60000;
  std::array<int, 4> hits{};
  for (int i = 0; i < draws; ++i) {
    const auto t = sample_targets(degrees, alpha, 2, rng);
    CHECK(t[0] != t[1]);
    for (int x : t) ++hits[x];
  }
  for (int k = 0; k < 4; ++k) {
    std::vector<bool> used(4, false);
    const double p = inclusion_probability(w, 2, k, used);
    CHECK(std::abs(hits[k] - p * draws) < 3.5 * std::sqrt(draws * p * (1 - p)));
  }
}

TEST_CASE("sample_targets infeasible") {
  Rng rng(1);
  const std::vector<int> degrees = {1, 0, 0};
  CHECK_THROWS_AS(sample_targets(degrees, 1.0, 2, rng), InfeasibleError);
}

TEST_CASE("generate_ba small cases") {
  const Graph g = generate_ba({2, 1, 1.0}, 99);
  CHECK(g.edges() == std::vector<std::pair<int, int>>{{0, 1}});
  CHECK(generate_ba({5, 2, 1.0}, 1).edge_count() == 6);
}

TEST_CASE("generate_ba invariants over a parameter grid") {
  for (int n : {3, 7, 12, 50}) {
    for (int m = 1; m < n; m += std::max(1, n / 6)) {
      for (double alpha : {0.2, 1.0, 3.0}) {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
          const Graph g = generate_ba({n, m, alpha}, seed, 60);
          REQUIRE(g.check_invariants());
          CHECK(g.edge_count() == static_cast<std::size_t>(m * (n - m)));
          const auto deg = g.degrees();
          for (int v = m; v < n; ++v) CHECK(deg[v] >= m);
          CHECK(g == generate_ba({n, m, alpha}, seed).padded(60));
        }
      }
    }
  }
}

TEST_CASE("generate_ba is deterministic") {
  CHECK(generate_ba({40, 3, 1.7}, 123) == generate_ba({40, 3, 1.7}, 123));
  CHECK_FALSE(generate_ba({40, 3, 1.7}, 123) == generate_ba({40, 3, 1.7}, 124));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(generate_ba({5, 5, 1.0}, 0), Error);
  CHECK_THROWS_AS(generate_ba({5, 0, 1.0}, 0), Error);
  CHECK_THROWS_AS(generate_ba({5, 2, 0.0}, 0), Error);
  CHECK_THROWS_AS(generate_ba({1, 1, 1.0}, 0), Error);
  CHECK_THROWS_AS(generate_er({5, 1.5}, 0), Error);
  CHECK_THROWS_AS(generate_er({5, -0.1}, 0), Error);
  CHECK_THROWS_AS(generate_ba({10, 2, 1.0}, 0, 5), Error);
}

TEST_CASE("linear BA degree tail") {
  double slope = 0;
  std::vector<int> pooled;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = generate_ba({2000, 3, 1.0}, seed).degrees();
    pooled.insert(pooled.end(), d.begin(), d.end());
  }
  slope = ccdf_slope(pooled);
  CHECK(slope <= -1.5);
  CHECK(slope >= -2.5);
}

TEST_CASE("max degree grows with alpha") {
  std::vector<double> means;
  for (double alpha : {0.5, 1.0, 2.0}) {
    double acc = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto d = generate_ba({200, 2, alpha}, seed).degrees();
      acc += *std::max_element(d.begin(), d.end());
    }
    means.push_back(acc / 200);
  }
  CHECK(means[0] < means[1]);
  CHECK(means[1] < means[2]);
}

TEST_CASE("generate_er") {
  CHECK(generate_er({10, 0.0}, 1).edge_count() == 0);
  CHECK(generate_er({10, 1.0}, 1).edge_count() == 45);
  double acc = 0;
  const int runs = 1000;
  for (int s = 0; s < runs; ++s) {
    const Graph g = generate_er({100, 0.1}, static_cast<std::uint64_t>(s));
    CHECK(g.check_invariants());
    acc += static_cast<double>(g.edge_count());
  }
  const double sigma = std::sqrt(4950 * 0.1 * 0.9);
  CHECK(std::abs(acc / runs - 495.0) < 3 * sigma / std::sqrt(runs));
}

TEST_CASE("graph helpers") {
  Graph g(4, 6);
  g.add_edge(0, 1);
  g.add_edge(2, 1);
  CHECK(g.degree(1) == 2);
  CHECK(g.edge_count() == 2);
  CHECK(g.check_invariants());
  CHECK_THROWS(g.add_edge(1, 1));
  CHECK_THROWS(g.add_edge(0, 5));
  const std::vector<int> perm = {3, 2, 1, 0};
  const Graph p = g.permuted(perm);
  CHECK(p.has_edge(3, 2));
  CHECK(p.has_edge(1, 2));
  CHECK(p.edge_count() == 2);

  std::ostringstream el, dot;
  write_edge_list(el, g);
  CHECK(el.str() == "# nodes 4\n0 1\n1 2\n");
  write_dot(dot, g);
  CHECK(dot.str().find("1 -- 2;") != std::string::npos);
}

TEST_CASE("dataset spec and generation") {
  DatasetSpec spec;
  spec.count = 100;
  spec.n_min = spec.n_max = 50;
  spec.m_min = 1;
  spec.m_max = 49;
  spec.alpha_uniform = true;
  spec.alpha_lo = 1.0 / 3.0;
  spec.alpha_hi = 3.0;
  spec.seed = 17;
  const Dataset ds = generate_dataset(spec);
  CHECK(ds.size() == 100);
  for (const auto& it : ds.items) {
    CHECK(it.params.alpha >= 1.0 / 3.0);
    CHECK(it.params.alpha <= 3.0);
    CHECK(it.params.m >= 1);
    CHECK(it.params.m <= 49);
    CHECK(it.graph.n_max() == 50);
    CHECK(it.graph == generate_ba(it.params, it.seed, 50));
  }

  std::ostringstream a, b, c;
  write_dataset(a, ds);
  write_dataset(b, generate_dataset(spec));
  write_dataset(c, generate_dataset(spec, 3));
  CHECK(a.str() == b.str());
  CHECK(a.str() == c.str());

  std::istringstream in(a.str());
  const Dataset back = read_dataset(in);
  CHECK(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.items[i].graph == ds.items[i].graph);
    CHECK(back.items[i].params == ds.items[i].params);
  }
}

TEST_CASE("dataset m capped by n") {
  DatasetSpec spec;
  spec.count = 300;
  spec.n_min = 3;
  spec.n_max = 12;
  spec.m_min = 1;
  spec.m_max = 11;
  spec.m_cap_by_n = true;
  spec.seed = 2;
  for (const auto& it : generate_dataset(spec).items) {
    CHECK(it.params.m < it.params.n);
    CHECK(it.graph.n_max() == 12);
  }
  spec.m_cap_by_n = false;
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("dataset errors") {
  DatasetSpec spec;
  spec.count = -1;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.count = 10;
  spec.pad = 20;
  CHECK_THROWS_AS(spec.validate(), Error);
  std::istringstream bad("{\"format\":\"other\"}\n");
  try {
    read_dataset(bad);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
  }
  std::istringstream garbage("not json\n");
  CHECK_THROWS_AS(read_dataset(garbage), Error);
  try {
    load_dataset("/nonexistent/file.jsonl");
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}
