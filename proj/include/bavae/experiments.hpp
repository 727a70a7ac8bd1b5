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

#ifndef BAVAE_EXPERIMENTS_HPP_
#define BAVAE_EXPERIMENTS_HPP_

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bavae/dataset.hpp"
#include "bavae/forest.hpp"
#include "bavae/metrics.hpp"
#include "bavae/training.hpp"

namespace bavae::experiments {

// ---- parameter prediction ----------------------------------------------------

using Prediction = std::array<double, 3>;  // (n, m, alpha)
using Predictor = std::function<Prediction(const Graph&)>;

// One forest per target over extract_features().
struct ForestBundle {
  std::array<forest::ForestModel, 3> models;

  Prediction predict(const Graph& g) const;
  nlohmann::json to_json() const;
  static ForestBundle from_json(const nlohmann::json& j);
};

forest::Matrix feature_matrix(const Dataset& ds);
ForestBundle fit_forest_bundle(const Dataset& train,
                               const forest::ForestConfig& config);

struct TargetMetrics {
  std::array<double, 3> mse{};
  std::array<std::optional<double>, 3> pearson;
};

TargetMetrics evaluate_predictions(const std::vector<Prediction>& pred,
                                   const Dataset& truth);

// Rounds n and m to valid integers (n >= 2, 1 <= m <= n - 1) and keeps alpha
// at or above `alpha_min`. `clamped` reports whether anything was forced.
BAParams to_valid_params(const Prediction& p, bool& clamped,
                         double alpha_min = 0.01);

// ---- posterior-predictive assessment-----------------------------------------------

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<int> counts;
};

// Freedman-Diaconis bin width; falls back to Sturges when the IQR is 0 and
// to a single bin for constant samples.
Histogram freedman_diaconis(const std::vector<double>& sample);

struct MeasureAssessment {
  double truth = 0;
  double percentile = 0;  // 100 * #(replicate <= truth) / R
  double band_lo = 0;     // 2.5% and 97.5% replicate quantiles
  double band_hi = 0;
  bool in_band = false;
  Histogram histogram;
};

struct AssessedGraph {
  int id = 0;
  BAParams truth;
  BAParams used;
  bool clamped = false;
  MeasureAssessment degree_std;
  MeasureAssessment betweenness_std;
};

struct AssessmentReport {
  int replicates = 0;
  bool oracle = false;
  std::vector<AssessedGraph> graphs;

  double in_band_fraction_degree() const;
  double in_band_fraction_betweenness() const;
};

struct AssessConfig {
  int replicates = 1000;
  int test_graphs = 25;  // first k graphs of the test set; 0 = all
  bool oracle = false;   // use the true parameters instead of predictions
  std::uint64_t seed = 0;
  int jobs = 1;
};

// `predict` may be empty in oracle mode.
AssessmentReport assess_predictions(const Predictor& predict,
                                    const Dataset& test,
                                    const AssessConfig& config);

void write_assessment_csv(std::ostream& os, const AssessmentReport& r);
// Long format: id,measure,bin,lo,hi,count.
void write_histogram_csv(std::ostream& os, const AssessmentReport& r);

// ---- supervised experiment -----------------------------------------------------

struct SupervisedExperimentConfig {
  int train_size = 2000;
  int test_size = 500;
  int n = 50;
  train::SupervisedConfig gnn;
  forest::ForestConfig rf;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct SupervisedRow {
  std::string model;
  std::string data;
  TargetMetrics metrics;
};

std::vector<SupervisedRow> run_supervised_experiment(
    const SupervisedExperimentConfig& config);

// model,data,mse_n,mse_m,mse_alpha,pearson_n,pearson_m,pearson_alpha; NA
// marks a Pearson coefficient that is undefined (constant column).
void write_supervised_csv(std::ostream& os, const std::vector<SupervisedRow>& rows);

// Named dataset regimes used by the experiments.
DatasetSpec supervised_spec(const std::string& regime, int count, int n,
                            std::uint64_t seed);
DatasetSpec vae_spec(bool nonlinear, int count, int n_min, int n_max,
                     std::uint64_t seed);

// ---- VAE / MIG experiment --------------------------------------------------------

struct VAEExperimentConfig {
  int graphs = 200;
  int n_min = 3;
  int n_max = 12;
  train::VAEConfig vae;
  int bins = 20;
  std::uint64_t seed = 0;
};

struct VAERun {
  std::string data;
  Dataset dataset;
  train::VAEResult result;
  metrics::FactorTable table;
};

struct VAEExperimentResult {
  std::vector<VAERun> runs;  // linear_ba, nonlinear_ba
  std::vector<std::pair<std::string, metrics::MIGReport>> mig;  // 3 rows
};

VAEExperimentResult run_vae_experiment(const VAEExperimentConfig& config);

metrics::FactorTable factor_table(const Dataset& ds,
                                  const std::vector<std::vector<double>>& latents);
// data,mig
void write_mig_summary_csv(std::ostream& os, const VAEExperimentResult& r);
void write_latents_csv(std::ostream& os, const Dataset& ds,
                       const std::vector<std::vector<double>>& latents);
void write_factors_csv(std::ostream& os, const Dataset& ds);

// Writes every artefact of a run into `dir` (created if missing).
void write_supervised_outputs(const std::string& dir,
                              const std::vector<SupervisedRow>& rows);
void write_vae_outputs(const std::string& dir, const VAEExperimentResult& r);
void write_assessment_outputs(const std::string& dir, const AssessmentReport& r,
                              const std::string& prefix = "assessment");

// Long-format summary (source,row,column,value) of every CSV in `dir`.
// Tables up to 50 rows are copied whole; longer ones contribute their last
// row under the key "last". A file named report.csv is skipped.
void write_report(std::ostream& os, const std::string& dir);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace bavae::experiments

#endif  // BAVAE_EXPERIMENTS_HPP_
