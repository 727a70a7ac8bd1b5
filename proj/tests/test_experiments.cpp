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
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bavae/csv.hpp"
#include "bavae/error.hpp"
#include "bavae/experiments.hpp"
#include "bavae/rng.hpp"

using namespace bavae;
using namespace bavae::experiments;
namespace fs = std::filesystem;

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string l;
  while (std::getline(is, l)) out.push_back(l);
  return out;
}

double sorted_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  return v[i] * (1 - (pos - i)) + v[i + 1] * (pos - i);
}

Dataset tiny_test_set(int count, std::uint64_t seed) {
  DatasetSpec s;
  s.count = count;
  s.n_min = s.n_max = 12;
  s.m_min = 1;
  s.m_max = 4;
  s.alpha_uniform = true;
  s.seed = seed;
  return generate_dataset(s);
}

}  // namespace

TEST_CASE("freedman-diaconis bins") {
  std::vector<double> s(100);
  std::iota(s.begin(), s.end(), 1.0);
  const auto h = freedman_diaconis(s);
  // IQR 75.25 - 25.75 = 49.5; width 99 / 100^(1/3); range 99.
  const double width = 2 * 49.5 / std::cbrt(100.0);
  const auto bins = static_cast<std::size_t>(std::ceil(99.0 / width));
  REQUIRE(h.counts.size() == bins);
  CHECK(bins == 5);
  CHECK(h.edges.size() == bins + 1);
  CHECK(h.edges.front() == 1.0);
  CHECK(h.edges.back() == 100.0);
  CHECK(std::accumulate(h.counts.begin(), h.counts.end(), 0) == 100);

  const auto c = freedman_diaconis(std::vector<double>(7, 2.5));
  CHECK(c.counts == std::vector<int>{7});
  CHECK(c.edges == std::vector<double>{2.5, 2.5});

  // Zero IQR: Sturges, ceil(log2 64 + 1) = 7.
  std::vector<double> z(64, 0.0);
  z[0] = -1.0;
  z[63] = 3.0;
  const auto hz = freedman_diaconis(z);
  CHECK(hz.counts.size() == 7);
  CHECK(std::accumulate(hz.counts.begin(), hz.counts.end(), 0) == 64);

  Rng rng(1);
  std::vector<double> g(5000);
  for (double& x : g) x = rng.normal();
  const auto hg = freedman_diaconis(g);
  CHECK(std::accumulate(hg.counts.begin(), hg.counts.end(), 0) == 5000);
  for (std::size_t b = 0; b + 1 < hg.edges.size(); ++b) CHECK(hg.edges[b] < hg.edges[b + 1]);
  CHECK(freedman_diaconis({}).counts.empty());
}

TEST_CASE("to_valid_params") {
  bool clamped = true;
  auto p = to_valid_params({20.0, 3.0, 1.5}, clamped);
  CHECK(!clamped);
  CHECK(p.n == 20);
  CHECK(p.m == 3);
  CHECK(p.alpha == 1.5);

  p = to_valid_params({49.6, 0.2, -1.0}, clamped);
  CHECK(clamped);
  CHECK(p.n == 50);
  CHECK(p.m == 1);
  CHECK(p.alpha == 0.01);

  p = to_valid_params({10.4, 12.7, 2.0}, clamped);
  CHECK(clamped);
  CHECK(p.n == 10);
  CHECK(p.m == 9);

  p = to_valid_params({1.2, 1.0, 1.0}, clamped);
  CHECK(clamped);
  CHECK(p.n == 2);
  CHECK(p.m == 1);

  p = to_valid_params({NAN, NAN, NAN}, clamped);
  CHECK(clamped);
  CHECK(p.n == 2);
  CHECK(p.m == 1);
  CHECK(p.alpha == 0.01);
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("posterior-predictive assessment") {
  const auto test = tiny_test_set(6, 3);
  AssessConfig c;
  c.oracle = true;
  c.replicates = 1;
  c.test_graphs = 4;
  c.seed = 9;
  const auto one = assess_predictions({}, test, c);
  REQUIRE(one.graphs.size() == 4);
  for (const auto& g : one.graphs) {
    CHECK((g.degree_std.percentile == 0.0 || g.degree_std.percentile == 100.0));
    CHECK((g.betweenness_std.percentile == 0.0 || g.betweenness_std.percentile == 100.0));
    CHECK(g.degree_std.band_lo == g.degree_std.band_hi);
  }

  c.replicates = 40;
  const auto r = assess_predictions({}, test, c);
  for (std::size_t i = 0; i < r.graphs.size(); ++i) {
    const auto& g = r.graphs[i];
    const auto& h = g.degree_std.histogram;
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), 0) == 40);
    const auto& hb = g.betweenness_std.histogram;
    CHECK(std::accumulate(hb.counts.begin(), hb.counts.end(), 0) == 40);
    CHECK(g.used.n == g.truth.n);
    CHECK(!g.clamped);

    // Truth statistic: population std of the degree sequence.
    const auto deg = test.items[i].graph.degrees();
    double mean = 0;
    for (int d : deg) mean += d;
    mean /= deg.size();
    double var = 0;
    for (int d : deg) var += (d - mean) * (d - mean);
    CHECK(g.degree_std.truth == doctest::Approx(std::sqrt(var / deg.size())).epsilon(1e-12));
    CHECK(g.degree_std.in_band ==
          (g.degree_std.truth >= g.degree_std.band_lo && g.degree_std.truth <= g.degree_std.band_hi));
  }

  // Replicates follow derive(derive(seed, i), r).
  {
    const auto& g0 = r.graphs[0];
    std::vector<double> reps;
    for (int k = 0; k < 40; ++k) {
      const auto g = generate_ba(g0.used, derive_seed(derive_seed(9, 0), k));
      const auto deg = g.degrees();
      double mean = 0;
      for (int d : deg) mean += d;
      mean /= deg.size();
      double var = 0;
      for (int d : deg) var += (d - mean) * (d - mean);
      reps.push_back(std::sqrt(var / deg.size()));
    }
    CHECK(g0.degree_std.band_lo == doctest::Approx(sorted_quantile(reps, 0.025)));
    CHECK(g0.degree_std.band_hi == doctest::Approx(sorted_quantile(reps, 0.975)));
    const double below = std::count_if(reps.begin(), reps.end(),
                                       [&](double x) { return x <= g0.degree_std.truth; });
    CHECK(g0.degree_std.percentile == doctest::Approx(100.0 * below / 40));
  }

  // Worker count does not change anything.
  c.jobs = 3;
  std::ostringstream a, b, ha;
  write_assessment_csv(a, r);
  write_assessment_csv(b, assess_predictions({}, test, c));
  CHECK(a.str() == b.str());
  CHECK(first_line(a.str()) ==
        "id,n,m,alpha,n_used,m_used,alpha_used,clamped,replicates,degree_std,degree_percentile,"
        "degree_band_lo,degree_band_hi,degree_in_band,betweenness_std,betweenness_percentile,"
        "betweenness_band_lo,betweenness_band_hi,betweenness_in_band");
  CHECK(lines(a.str()).size() == 5);
  write_histogram_csv(ha, r);
  CHECK(first_line(ha.str()) == "id,measure,bin,lo,hi,count");

  const double f = r.in_band_fraction_degree();
  double cnt = 0;
  for (const auto& g : r.graphs) cnt += g.degree_std.in_band;
  CHECK(f == cnt / 4);

  // Predictor path with clamping.
  c.oracle = false;
  const auto clamped = assess_predictions(
      [](const Graph&) { return Prediction{12.2, 40.0, -3.0}; }, test, c);
  for (const auto& g : clamped.graphs) {
    CHECK(g.clamped);
    CHECK(g.used.n == 12);
    CHECK(g.used.m == 11);
    CHECK(g.used.alpha == 0.01);
  }
  CHECK_THROWS_AS(assess_predictions({}, test, c), Error);
  c.replicates = 0;
  c.oracle = true;
  CHECK_THROWS_AS(assess_predictions({}, test, c), Error);
}

TEST_CASE("forest bundle and prediction metrics") {
  const auto train = tiny_test_set(60, 4);
  const auto test = tiny_test_set(10, 5);
  forest::ForestConfig fc;
  fc.n_trees = 10;
  fc.seed = 2;
  const auto bundle = fit_forest_bundle(train, fc);
  const auto back = ForestBundle::from_json(bundle.to_json());
  std::vector<Prediction> preds;
  for (const auto& it : test.items) {
    const auto p = bundle.predict(it.graph);
    CHECK(back.predict(it.graph) == p);
    preds.push_back(p);
  }
  const auto m = evaluate_predictions(preds, test);
  CHECK(!m.pearson[0].has_value());  // n constant
  CHECK(m.mse[0] == doctest::Approx(0.0));
  CHECK(m.pearson[1].has_value());
  CHECK(feature_matrix(test).rows == 10);
  CHECK(feature_matrix(test).cols == 13);
  preds.pop_back();
  CHECK_THROWS_AS(evaluate_predictions(preds, test), Error);

  nlohmann::json bad = bundle.to_json();
  bad["format"] = "other";
  CHECK_THROWS(ForestBundle::from_json(bad));

  std::vector<SupervisedRow> rows = {{"rf", "linear_ba", m}};
  std::ostringstream os;
  write_supervised_csv(os, rows);
  const auto ls = lines(os.str());
  CHECK(ls[0] == "model,data,mse_n,mse_m,mse_alpha,pearson_n,pearson_m,pearson_alpha");
  CHECK(csv::split(ls[1])[5] == "NA");
}

TEST_CASE("dataset regimes") {
  const auto lin = supervised_spec("linear_ba", 10, 50, 1);
  CHECK(!lin.alpha_uniform);
  CHECK(lin.alpha == 1.0);
  CHECK(lin.m_max == 49);
  const auto nl = supervised_spec("nonlinear_ba", 10, 50, 1);
  CHECK(nl.alpha_lo == doctest::Approx(1.0 / 3.0));
  CHECK(nl.alpha_hi == 3.0);
  const auto u = supervised_spec("uniform_0_3", 10, 50, 1);
  CHECK(u.alpha_lo == 0.0);
  CHECK(u.alpha_floor > 0.0);
  CHECK_THROWS_AS(supervised_spec("bogus", 10, 50, 1), Error);

  const auto v = vae_spec(true, 30, 3, 12, 2);
  CHECK(v.m_cap_by_n);
  const auto ds = generate_dataset(v);
  for (const auto& it : ds.items) {
    CHECK(it.params.n >= 3);
    CHECK(it.params.n <= 12);
    CHECK(it.params.m <= it.params.n - 1);
  }

  std::vector<std::vector<double>> lat(ds.size(), std::vector<double>{0.5, -1.0});
  std::ostringstream l, f;
  write_latents_csv(l, ds, lat);
  write_factors_csv(f, ds);
  CHECK(first_line(l.str()) == "id,z0,z1");
  CHECK(first_line(f.str()) == "id,n,m,alpha");
  const auto t = factor_table(ds, lat);
  CHECK(t.factor_names == std::vector<std::string>{"n", "m", "alpha"});
  CHECK(t.rows() == ds.size());
}

TEST_CASE("report aggregation") {
  const auto dir = fs::temp_directory_path() / "bavae_test_report";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_text_file((dir / "a.csv").string(), "key,x,y\nr1,1,2\nr2,3,\n");
  std::string longer = "epoch,loss\n";
  for (int i = 1; i <= 60; ++i) longer += std::to_string(i) + "," + std::to_string(100 - i) + "\n";
  write_text_file((dir / "b.csv").string(), longer);
  write_text_file((dir / "report.csv").string(), "stale\n");
  write_text_file((dir / "notes.txt").string(), "ignored\n");

  std::ostringstream os;
  write_report(os, dir.string());
  const auto ls = lines(os.str());
  const std::vector<std::string> expect = {
      "source,row,column,value", "a.csv,r1,x,1", "a.csv,r1,y,2", "a.csv,r2,x,3",
      "b.csv,last,loss,40"};
  CHECK(ls == expect);
  CHECK_THROWS_AS(write_report(os, (dir / "missing").string()), Error);
  fs::remove_all(dir);
}
