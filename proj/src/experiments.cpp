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

#include "bavae/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "bavae/csv.hpp"
#include "bavae/error.hpp"
#include "bavae/features.hpp"

namespace bavae::experiments {

namespace fs = std::filesystem;

namespace {

double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

std::string na_or(const std::optional<double>& v) {
  return v ? csv::num(*v) : std::string("NA");
}

template <class F>
void parallel_for(int count, int jobs, F&& body) {
  jobs = std::clamp(jobs, 1, std::max(1, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += jobs) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::array<double, 3> truth_row(const BAParams& p) {
  return {static_cast<double>(p.n), static_cast<double>(p.m), p.alpha};
}

}  // namespace

// ---- prediction ------------------------------------------------------------------

forest::Matrix feature_matrix(const Dataset& ds) {
  forest::Matrix X;
  X.rows = ds.size();
  X.cols = features::kFeatureCount;
  X.data.reserve(X.rows * X.cols);
  for (const auto& it : ds.items) {
    const auto f = features::extract_features(it.graph);
    X.data.insert(X.data.end(), f.begin(), f.end());
  }
  return X;
}

ForestBundle fit_forest_bundle(const Dataset& train,
                               const forest::ForestConfig& config) {
  const auto X = feature_matrix(train);
  ForestBundle b;
  for (int k = 0; k < 3; ++k) {
    std::vector<double> y;
    for (const auto& it : train.items) y.push_back(truth_row(it.params)[k]);
    forest::ForestConfig c = config;
    c.seed = derive_seed(config.seed, static_cast<std::uint64_t>(k));
    b.models[k] = forest::fit(X, y, c, train::kTargetNames[k]);
  }
  return b;
}

Prediction ForestBundle::predict(const Graph& g) const {
  const auto f = features::extract_features(g);
  Prediction p{};
  for (int k = 0; k < 3; ++k) p[k] = models[k].predict(f);
  return p;
}

nlohmann::json ForestBundle::to_json() const {
  nlohmann::json targets = nlohmann::json::object();
  for (int k = 0; k < 3; ++k) targets[train::kTargetNames[k]] = forest::to_json(models[k]);
  return {{"format", "bavae-forest"},
          {"version", 1},
          {"features", std::vector<std::string>(features::kFeatureNames.begin(),
                                                features::kFeatureNames.end())},
          {"targets", std::move(targets)}};
}

ForestBundle ForestBundle::from_json(const nlohmann::json& j) {
  ForestBundle b;
  try {
    if (j.at("format").get<std::string>() != "bavae-forest") {
      throw Error(ErrorCode::kParse, "not a forest bundle");
    }
    for (int k = 0; k < 3; ++k) {
      b.models[k] = forest::from_json(j.at("targets").at(train::kTargetNames[k]));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("forest bundle: ") + e.what());
  }
  return b;
}

TargetMetrics evaluate_predictions(const std::vector<Prediction>& pred,
                                   const Dataset& truth) {
  if (pred.size() != truth.size()) throw_invalid("evaluate: size mismatch");
  TargetMetrics m;
  for (int k = 0; k < 3; ++k) {
    std::vector<double> p, t;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      p.push_back(pred[i][k]);
      t.push_back(truth_row(truth.items[i].params)[k]);
    }
    m.mse[k] = metrics::mse(p, t);
    try {
      m.pearson[k] = metrics::pearson(p, t);
    } catch (const Error&) {
      m.pearson[k].reset();
    }
  }
  return m;
}

BAParams to_valid_params(const Prediction& p, bool& clamped, double alpha_min) {
  clamped = false;
  BAParams out;
  const double n_raw = std::isfinite(p[0]) ? std::round(p[0]) : 2.0;
  const double m_raw = std::isfinite(p[1]) ? std::round(p[1]) : 1.0;
  out.n = static_cast<int>(std::clamp(n_raw, 2.0, 1e6));
  out.m = static_cast<int>(std::clamp(m_raw, 1.0, 1e6));
  if (out.n != n_raw || out.m != m_raw) clamped = true;
  if (out.m >= out.n) {
    out.m = out.n - 1;
    clamped = true;
  }
  out.alpha = p[2];
  if (!(out.alpha >= alpha_min)) {
    out.alpha = alpha_min;
    clamped = true;
  }
  return out;
}

// ---- assessment --------------------------------------------------------------------

Histogram freedman_diaconis(const std::vector<double>& sample) {
  Histogram h;
  if (sample.empty()) return h;
  std::vector<double> s = sample;
  std::sort(s.begin(), s.end());
  const double lo = s.front(), hi = s.back();
  if (hi == lo) {
    h.edges = {lo, hi};
    h.counts = {static_cast<int>(s.size())};
    return h;
  }
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  std::size_t bins;
  if (iqr > 0.0) {
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(s.size()));
    bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
  } else {
    bins = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(s.size())) + 1));
  }
  bins = std::clamp<std::size_t>(bins, 1, 1000);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + width * b);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double x : s) {
    auto b = static_cast<std::size_t>(std::floor((x - lo) / width));
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

namespace {

MeasureAssessment assess_measure(double truth, std::vector<double> reps) {
  MeasureAssessment m;
  m.truth = truth;
  m.histogram = freedman_diaconis(reps);
  std::sort(reps.begin(), reps.end());
  const auto below = std::upper_bound(reps.begin(), reps.end(), truth) - reps.begin();
  m.percentile = 100.0 * static_cast<double>(below) / static_cast<double>(reps.size());
  m.band_lo = quantile_sorted(reps, 0.025);
  m.band_hi = quantile_sorted(reps, 0.975);
  m.in_band = truth >= m.band_lo && truth <= m.band_hi;
  return m;
}

std::pair<double, double> dispersion(const Graph& g) {
  const auto deg = g.degrees();
  const std::vector<double> d(deg.begin(), deg.end());
  auto bc = features::betweenness(g);
  std::sort(bc.begin(), bc.end());
  return {features::population_std(d), features::population_std(bc)};
}

}  // namespace

double AssessmentReport::in_band_fraction_degree() const {
  if (graphs.empty()) return 0.0;
  double c = 0;
  for (const auto& g : graphs) c += g.degree_std.in_band;
  return c / static_cast<double>(graphs.size());
}

double AssessmentReport::in_band_fraction_betweenness() const {
  if (graphs.empty()) return 0.0;
  double c = 0;
  for (const auto& g : graphs) c += g.betweenness_std.in_band;
  return c / static_cast<double>(graphs.size());
}

AssessmentReport assess_predictions(const Predictor& predict,
                                    const Dataset& test,
                                    const AssessConfig& config) {
  if (config.replicates < 1) throw_invalid("assess: replicates must be >= 1");
  if (!config.oracle && !predict) throw_invalid("assess: no predictor given");
  const int count = config.test_graphs > 0
                        ? std::min<int>(config.test_graphs, static_cast<int>(test.size()))
                        : static_cast<int>(test.size());
  AssessmentReport report;
  report.replicates = config.replicates;
  report.oracle = config.oracle;
  report.graphs.resize(count);

  parallel_for(count, config.jobs, [&](int i) {
    const auto& item = test.items[i];
    AssessedGraph& out = report.graphs[i];
    out.id = item.id;
    out.truth = item.params;
    if (config.oracle) {
      out.used = item.params;
    } else {
      out.used = to_valid_params(predict(item.graph), out.clamped);
    }
    const auto [deg_truth, bc_truth] = dispersion(item.graph);
    std::vector<double> deg_reps, bc_reps;
    const std::uint64_t base = derive_seed(config.seed, static_cast<std::uint64_t>(i));
    for (int r = 0; r < config.replicates; ++r) {
      const Graph g = generate_ba(out.used, derive_seed(base, static_cast<std::uint64_t>(r)));
      const auto [d, b] = dispersion(g);
      deg_reps.push_back(d);
      bc_reps.push_back(b);
    }
    out.degree_std = assess_measure(deg_truth, std::move(deg_reps));
    out.betweenness_std = assess_measure(bc_truth, std::move(bc_reps));
  });
  return report;
}

void write_assessment_csv(std::ostream& os, const AssessmentReport& r) {
  os << "id,n,m,alpha,n_used,m_used,alpha_used,clamped,replicates,"
        "degree_std,degree_percentile,degree_band_lo,degree_band_hi,degree_in_band,"
        "betweenness_std,betweenness_percentile,betweenness_band_lo,"
        "betweenness_band_hi,betweenness_in_band\n";
  for (const auto& g : r.graphs) {
    os << g.id << ',' << g.truth.n << ',' << g.truth.m << ',' << csv::num(g.truth.alpha)
       << ',' << g.used.n << ',' << g.used.m << ',' << csv::num(g.used.alpha) << ','
       << (g.clamped ? 1 : 0) << ',' << r.replicates;
    for (const auto* m : {&g.degree_std, &g.betweenness_std}) {
      os << ',' << csv::num(m->truth) << ',' << csv::num(m->percentile) << ','
         << csv::num(m->band_lo) << ',' << csv::num(m->band_hi) << ','
         << (m->in_band ? 1 : 0);
    }
    os << '\n';
  }
}

void write_histogram_csv(std::ostream& os, const AssessmentReport& r) {
  os << "id,measure,bin,lo,hi,count\n";
  for (const auto& g : r.graphs) {
    for (const auto& [name, m] : {std::pair{"degree_std", &g.degree_std},
                                  std::pair{"betweenness_std", &g.betweenness_std}}) {
      const auto& h = m->histogram;
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        os << g.id << ',' << name << ',' << b << ',' << csv::num(h.edges[b]) << ','
           << csv::num(h.edges[b + 1]) << ',' << h.counts[b] << '\n';
      }
    }
  }
}

// ---- supervised -------------------------------------------------------------------

DatasetSpec supervised_spec(const std::string& regime, int count, int n,
                            std::uint64_t seed) {
  DatasetSpec s;
  s.count = count;
  s.n_min = s.n_max = n;
  s.m_min = 1;
  s.m_max = n - 1;
  s.seed = seed;
  if (regime == "linear_ba") {
    s.alpha_uniform = false;
    s.alpha = 1.0;
  } else if (regime == "nonlinear_ba") {
    s.alpha_uniform = true;
    s.alpha_lo = 1.0 / 3.0;
    s.alpha_hi = 3.0;
  } else if (regime == "uniform_0_3") {
    s.alpha_uniform = true;
    s.alpha_lo = 0.0;
    s.alpha_hi = 3.0;
    s.alpha_floor = 0.01;
  } else {
    throw_invalid("unknown dataset regime: " + regime);
  }
  return s;
}

std::vector<SupervisedRow> run_supervised_experiment(
    const SupervisedExperimentConfig& config) {
  const std::array<const char*, 3> regimes = {"linear_ba", "nonlinear_ba", "uniform_0_3"};
  std::array<Dataset, 3> train, test;
  for (std::size_t r = 0; r < regimes.size(); ++r) {
    train[r] = generate_dataset(
        supervised_spec(regimes[r], config.train_size, config.n,
                        derive_seed(config.seed, 10 + 2 * r)),
        config.jobs);
    test[r] = generate_dataset(
        supervised_spec(regimes[r], config.test_size, config.n,
                        derive_seed(config.seed, 11 + 2 * r)),
        config.jobs);
  }

  std::vector<SupervisedRow> rows;
  for (std::size_t r = 0; r < 2; ++r) {
    train::SupervisedConfig gc = config.gnn;
    gc.seed = derive_seed(config.seed, 100 + r);
    const auto res = train::train_supervised_gnn(train[r], test[r], gc);
    SupervisedRow row{"gnn", regimes[r], {}};
    row.metrics.mse = res.test_mse;
    row.metrics.pearson = res.test_pearson;
    rows.push_back(std::move(row));
  }
  for (std::size_t r = 0; r < 3; ++r) {
    forest::ForestConfig fc = config.rf;
    fc.seed = derive_seed(config.seed, 200 + r);
    fc.jobs = config.jobs;
    const auto bundle = fit_forest_bundle(train[r], fc);
    std::vector<Prediction> pred;
    for (const auto& it : test[r].items) pred.push_back(bundle.predict(it.graph));
    rows.push_back({"rf", regimes[r], evaluate_predictions(pred, test[r])});
  }
  return rows;
}

void write_supervised_csv(std::ostream& os, const std::vector<SupervisedRow>& rows) {
  os << "model,data,mse_n,mse_m,mse_alpha,pearson_n,pearson_m,pearson_alpha\n";
  for (const auto& r : rows) {
    os << r.model << ',' << r.data;
    for (double v : r.metrics.mse) os << ',' << csv::num(v);
    for (const auto& p : r.metrics.pearson) os << ',' << na_or(p);
    os << '\n';
  }
}

// ---- VAE --------------------------------------------------------------------------

DatasetSpec vae_spec(bool nonlinear, int count, int n_min, int n_max,
                     std::uint64_t seed) {
  DatasetSpec s;
  s.count = count;
  s.n_min = n_min;
  s.n_max = n_max;
  s.m_min = 1;
  s.m_max = n_max - 1;
  s.m_cap_by_n = true;
  s.alpha_uniform = nonlinear;
  s.alpha = 1.0;
  s.alpha_lo = 1.0 / 3.0;
  s.alpha_hi = 3.0;
  s.seed = seed;
  return s;
}

metrics::FactorTable factor_table(const Dataset& ds,
                                  const std::vector<std::vector<double>>& latents) {
  metrics::FactorTable t;
  t.factor_names = {"n", "m", "alpha"};
  t.factors.assign(3, {});
  for (const auto& it : ds.items) {
    const auto row = truth_row(it.params);
    for (int k = 0; k < 3; ++k) t.factors[k].push_back(row[k]);
  }
  const std::size_t J = latents.empty() ? 0 : latents[0].size();
  for (std::size_t j = 0; j < J; ++j) {
    t.latent_names.push_back("z" + std::to_string(j));
    std::vector<double> col;
    for (const auto& row : latents) col.push_back(row[j]);
    t.latents.push_back(std::move(col));
  }
  return t;
}

VAEExperimentResult run_vae_experiment(const VAEExperimentConfig& config) {
  VAEExperimentResult out;
  for (int nonlinear = 0; nonlinear < 2; ++nonlinear) {
    VAERun run;
    run.data = nonlinear ? "nonlinear_ba" : "linear_ba";
    run.dataset = generate_dataset(vae_spec(nonlinear != 0, config.graphs,
                                            config.n_min, config.n_max,
                                            derive_seed(config.seed, 20 + nonlinear)));
    train::VAEConfig vc = config.vae;
    vc.seed = derive_seed(config.seed, 30 + nonlinear);
    run.result = train::train_vae(run.dataset, vc);
    run.table = factor_table(run.dataset, run.result.latents);
    out.runs.push_back(std::move(run));
  }
  const auto& lin = out.runs[0].table;
  out.mig.emplace_back("linear_ba", metrics::mig(lin, config.bins));
  out.mig.emplace_back(
      "linear_ba_m_over_n",
      metrics::mig(metrics::replace_factor(metrics::reparameterize_factor_m_over_n(lin),
                                           "m", "m_over_n"),
                   config.bins));
  out.mig.emplace_back("nonlinear_ba", metrics::mig(out.runs[1].table, config.bins));
  return out;
}

void write_mig_summary_csv(std::ostream& os, const VAEExperimentResult& r) {
  os << "data,mig\n";
  for (const auto& [name, rep] : r.mig) os << name << ',' << csv::num(rep.mig) << '\n';
}

void write_latents_csv(std::ostream& os, const Dataset& ds,
                       const std::vector<std::vector<double>>& latents) {
  os << "id";
  const std::size_t J = latents.empty() ? 0 : latents[0].size();
  for (std::size_t j = 0; j < J; ++j) os << ",z" << j;
  os << '\n';
  for (std::size_t i = 0; i < latents.size(); ++i) {
    os << ds.items[i].id;
    for (double v : latents[i]) os << ',' << csv::num(v);
    os << '\n';
  }
}

void write_factors_csv(std::ostream& os, const Dataset& ds) {
  os << "id,n,m,alpha\n";
  for (const auto& it : ds.items) {
    os << it.id << ',' << it.params.n << ',' << it.params.m << ','
       << csv::num(it.params.alpha) << '\n';
  }
}

// ---- outputs -------------------------------------------------------------------------

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  os << content;
  if (!os) throw Error(ErrorCode::kIo, "write failed: " + path);
}

namespace {

template <class F>
void write_with(const fs::path& path, F&& fn) {
  std::ostringstream os;
  fn(os);
  write_text_file(path.string(), os.str());
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
}

}  // namespace

void write_supervised_outputs(const std::string& dir,
                              const std::vector<SupervisedRow>& rows) {
  ensure_dir(dir);
  write_with(fs::path(dir) / "supervised_metrics.csv",
             [&](std::ostream& os) { write_supervised_csv(os, rows); });
}

void write_vae_outputs(const std::string& dir, const VAEExperimentResult& r) {
  ensure_dir(dir);
  const fs::path d(dir);
  write_with(d / "mig.csv", [&](std::ostream& os) { write_mig_summary_csv(os, r); });
  for (const auto& [name, rep] : r.mig) {
    write_with(d / ("mig_" + name + ".csv"),
               [&](std::ostream& os) { metrics::write_mig_csv(os, rep); });
  }
  for (const auto& run : r.runs) {
    write_with(d / ("vae_report_" + run.data + ".csv"),
               [&](std::ostream& os) { train::write_report_csv(os, run.result.report); });
    write_with(d / ("latents_" + run.data + ".csv"), [&](std::ostream& os) {
      write_latents_csv(os, run.dataset, run.result.latents);
    });
    write_with(d / ("factors_" + run.data + ".csv"),
               [&](std::ostream& os) { write_factors_csv(os, run.dataset); });
  }
}

void write_assessment_outputs(const std::string& dir, const AssessmentReport& r,
                              const std::string& prefix) {
  ensure_dir(dir);
  const fs::path d(dir);
  write_with(d / (prefix + ".csv"), [&](std::ostream& os) { write_assessment_csv(os, r); });
  write_with(d / (prefix + "_histograms.csv"),
             [&](std::ostream& os) { write_histogram_csv(os, r); });
}

void write_report(std::ostream& os, const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv" &&
        e.path().filename() != "report.csv") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  os << "source,row,column,value\n";
  for (const auto& f : files) {
    std::ifstream is(f);
    std::string line;
    if (!std::getline(is, line)) continue;
    const auto header = csv::split(line);
    std::vector<std::vector<std::string>> rows;
    while (std::getline(is, line)) {
      if (!line.empty()) rows.push_back(csv::split(line));
    }
    const bool whole = rows.size() <= 50;
    const std::size_t first = whole ? 0 : rows.size() - 1;
    for (std::size_t r = first; r < rows.size(); ++r) {
      const std::string key = whole ? rows[r][0] : "last";
      for (std::size_t c = 1; c < rows[r].size() && c < header.size(); ++c) {
        if (rows[r][c].empty()) continue;
        os << f.filename().string() << ',' << key << ',' << header[c] << ','
           << rows[r][c] << '\n';
      }
    }
  }
}

}  // namespace bavae::experiments
