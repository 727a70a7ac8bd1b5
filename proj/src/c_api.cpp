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

#include "bavae/bavae.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bavae/csv.hpp"
#include "bavae/dataset.hpp"
#include "bavae/error.hpp"
#include "bavae/experiments.hpp"
#include "bavae/features.hpp"
#include "bavae/graph.hpp"
#include "bavae/metrics.hpp"
#include "bavae/training.hpp"

struct bavae_dataset {
  bavae::Dataset ds;
};

namespace {

namespace ex = bavae::experiments;
namespace fs = std::filesystem;

thread_local std::string g_last_error;

bavae_status fail(bavae_status s, const std::string& msg) {
  g_last_error = msg;
  for (char& c : g_last_error) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

template <class F>
bavae_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return BAVAE_OK;
  } catch (const bavae::DivergenceError& e) {
    return fail(BAVAE_E_DIVERGED, std::string(e.what()) + " (epoch " +
                                      std::to_string(e.epoch()) + ")");
  } catch (const bavae::Error& e) {
    return fail(static_cast<bavae_status>(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(BAVAE_E_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(BAVAE_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BAVAE_E_INTERNAL, e.what());
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) bavae::throw_invalid(std::string(what) + " is null");
}

std::string parent_dir(const std::string& path) {
  const auto p = fs::path(path).parent_path();
  return p.empty() ? std::string(".") : p.string();
}

void ensure_parent(const std::string& path) {
  std::error_code ec;
  fs::create_directories(parent_dir(path), ec);
}

template <class F>
void write_file(const std::string& path, F&& fn) {
  ensure_parent(path);
  std::ostringstream os;
  fn(os);
  ex::write_text_file(path, os.str());
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw bavae::Error(bavae::ErrorCode::kIo, "cannot open " + path);
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw bavae::Error(bavae::ErrorCode::kParse, path + ": " + e.what());
  }
}

void write_graph(const bavae::Graph& g, const char* format, const char* path) {
  require(path, "path");
  const std::string fmt = format ? format : "edges";
  if (fmt != "edges" && fmt != "dot") bavae::throw_invalid("unknown graph format: " + fmt);
  write_file(path, [&](std::ostream& os) {
    if (fmt == "dot") {
      bavae::write_dot(os, g);
    } else {
      bavae::write_edge_list(os, g);
    }
  });
}

bavae::DatasetSpec to_spec(const bavae_dataset_spec& s) {
  bavae::DatasetSpec out;
  out.count = s.count;
  out.n_min = s.n_min;
  out.n_max = s.n_max;
  out.m_min = s.m_min;
  out.m_max = s.m_max;
  out.m_cap_by_n = s.m_cap_by_n != 0;
  out.alpha_uniform = s.alpha_uniform != 0;
  out.alpha = s.alpha;
  out.alpha_lo = s.alpha_lo;
  out.alpha_hi = s.alpha_hi;
  out.alpha_floor = s.alpha_floor;
  out.pad = s.pad;
  out.seed = s.seed;
  return out;
}

bavae::forest::ForestConfig to_forest(const bavae_forest_config& c) {
  bavae::forest::ForestConfig out;
  out.n_trees = c.n_trees;
  out.max_depth = c.max_depth;
  out.min_leaf = c.min_leaf;
  out.features_per_split = c.features_per_split;
  out.bootstrap = c.bootstrap != 0;
  out.seed = c.seed;
  out.jobs = c.jobs;
  return out;
}

bavae::train::SupervisedConfig to_gnn(const bavae_gnn_config& c) {
  bavae::train::SupervisedConfig out;
  out.epochs = c.epochs;
  out.batch_size = c.batch_size;
  out.encoder.conv_layers = c.conv_layers;
  out.encoder.hidden_width = c.hidden_width;
  out.encoder.head_widths = {c.head_width};
  out.encoder.pooling = c.mean_pooling ? bavae::nn::Pooling::kMean : bavae::nn::Pooling::kSum;
  out.adam.lr = c.learning_rate;
  out.seed = c.seed;
  return out;
}

bavae::train::VAEConfig to_vae(const bavae_vae_config& c) {
  bavae::train::VAEConfig out;
  out.beta = c.beta;
  out.epochs = c.epochs;
  out.batch_size = c.batch_size;
  out.latent_dim = c.latent_dim;
  out.adam.lr = c.learning_rate;
  out.seed = c.seed;
  out.conv_layers = c.conv_layers;
  out.hidden_width = c.hidden_width;
  out.head_widths = {c.head_width};
  out.step_dim = c.step_dim;
  out.lstm_hidden = c.lstm_hidden;
  out.weights.sym = c.w_sym;
  out.weights.diag = c.w_diag;
  out.weights.grow_nodes = c.w_grow_nodes;
  out.weights.grow_edges = c.w_grow_edges;
  out.weights.empty_start = c.w_empty_start;
  out.validate();
  return out;
}

ex::Predictor load_predictor(const std::string& path) {
  const auto j = read_json(path);
  const std::string format = j.value("format", "");
  if (format == "bavae-forest") {
    auto bundle = std::make_shared<ex::ForestBundle>(ex::ForestBundle::from_json(j));
    return [bundle](const bavae::Graph& g) { return bundle->predict(g); };
  }
  if (format == "bavae-checkpoint" && j.value("kind", "") == "gnn_supervised") {
    auto pred = std::make_shared<bavae::train::ParameterPredictor>(j);
    return [pred](const bavae::Graph& g) { return pred->predict(g); };
  }
  throw bavae::Error(bavae::ErrorCode::kParse,
                     path + ": not a forest bundle or supervised GNN checkpoint");
}

}  // namespace

extern "C" {

const char* bavae_version(void) { return "1.0.0"; }

const char* bavae_status_name(bavae_status status) {
  switch (status) {
    case BAVAE_OK: return "ok";
    case BAVAE_E_INVALID_ARGUMENT: return "invalid_argument";
    case BAVAE_E_INFEASIBLE: return "infeasible";
    case BAVAE_E_DIMENSION: return "dimension";
    case BAVAE_E_IO: return "io";
    case BAVAE_E_PARSE: return "parse";
    case BAVAE_E_DIVERGED: return "diverged";
    case BAVAE_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* bavae_last_error(void) { return g_last_error.c_str(); }

void bavae_dataset_spec_init(bavae_dataset_spec* spec) {
  if (spec == nullptr) return;
  const bavae::DatasetSpec d;
  *spec = {d.count, d.n_min, d.n_max, d.m_min, d.m_max, d.m_cap_by_n, d.alpha_uniform,
           d.alpha, d.alpha_lo, d.alpha_hi, d.alpha_floor, d.pad, d.seed};
}

bavae_status bavae_dataset_generate(const bavae_dataset_spec* spec, int jobs,
                                    bavae_dataset** out) {
  return guarded([&] {
    require(spec, "spec");
    require(out, "out");
    *out = nullptr;
    auto h = std::make_unique<bavae_dataset>();
    h->ds = bavae::generate_dataset(to_spec(*spec), jobs);
    *out = h.release();
  });
}

bavae_status bavae_dataset_load(const char* path, bavae_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto h = std::make_unique<bavae_dataset>();
    h->ds = bavae::load_dataset(path);
    *out = h.release();
  });
}

bavae_status bavae_dataset_save(const bavae_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds, "dataset");
    require(path, "path");
    ensure_parent(path);
    bavae::save_dataset(path, ds->ds);
  });
}

size_t bavae_dataset_size(const bavae_dataset* ds) { return ds ? ds->ds.size() : 0; }

int bavae_dataset_n_max(const bavae_dataset* ds) { return ds ? ds->ds.n_max() : 0; }

bavae_status bavae_dataset_params(const bavae_dataset* ds, size_t index, int* n, int* m,
                                  double* alpha) {
  return guarded([&] {
    require(ds, "dataset");
    if (index >= ds->ds.size()) bavae::throw_invalid("index out of range");
    const auto& p = ds->ds.items[index].params;
    if (n) *n = p.n;
    if (m) *m = p.m;
    if (alpha) *alpha = p.alpha;
  });
}

void bavae_dataset_free(bavae_dataset* ds) { delete ds; }

bavae_status bavae_dataset_export_graph(const bavae_dataset* ds, size_t index,
                                        const char* format, const char* path) {
  return guarded([&] {
    require(ds, "dataset");
    if (index >= ds->ds.size()) bavae::throw_invalid("index out of range");
    write_graph(ds->ds.items[index].graph, format, path);
  });
}

bavae_status bavae_export_ba(int n, int m, double alpha, uint64_t seed, const char* format,
                             const char* path) {
  return guarded([&] {
    write_graph(bavae::generate_ba({n, m, alpha}, seed), format, path);
  });
}

bavae_status bavae_export_er(int n, double p, uint64_t seed, const char* format,
                             const char* path) {
  return guarded([&] { write_graph(bavae::generate_er({n, p}, seed), format, path); });
}

bavae_status bavae_write_features(const bavae_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds, "dataset");
    require(path, "path");
    write_file(path, [&](std::ostream& os) { bavae::features::write_feature_csv(os, ds->ds); });
  });
}

void bavae_forest_config_init(bavae_forest_config* cfg) {
  if (cfg == nullptr) return;
  const bavae::forest::ForestConfig d;
  *cfg = {d.n_trees, d.max_depth, d.min_leaf, d.features_per_split, d.bootstrap, d.seed,
          d.jobs};
}

bavae_status bavae_train_rf(const bavae_dataset* train, const bavae_dataset* test,
                            const bavae_forest_config* cfg, const char* model_path,
                            const char* metrics_path) {
  return guarded([&] {
    require(train, "train dataset");
    require(cfg, "config");
    require(model_path, "model path");
    const auto bundle = ex::fit_forest_bundle(train->ds, to_forest(*cfg));
    write_file(model_path, [&](std::ostream& os) { os << bundle.to_json().dump() << '\n'; });
    if (test != nullptr && metrics_path != nullptr) {
      std::vector<ex::Prediction> pred;
      for (const auto& it : test->ds.items) pred.push_back(bundle.predict(it.graph));
      const ex::SupervisedRow row{"rf", "test", ex::evaluate_predictions(pred, test->ds)};
      write_file(metrics_path, [&](std::ostream& os) { ex::write_supervised_csv(os, {row}); });
    }
  });
}

void bavae_gnn_config_init(bavae_gnn_config* cfg) {
  if (cfg == nullptr) return;
  const bavae::train::SupervisedConfig d;
  *cfg = {d.epochs,
          d.batch_size,
          d.encoder.conv_layers,
          d.encoder.hidden_width,
          d.encoder.head_widths.empty() ? 64 : d.encoder.head_widths[0],
          d.encoder.pooling == bavae::nn::Pooling::kMean,
          d.adam.lr,
          d.seed};
}

bavae_status bavae_train_gnn(const bavae_dataset* train, const bavae_dataset* test,
                             const bavae_gnn_config* cfg, const char* checkpoint_path,
                             const char* metrics_path, const char* loss_path) {
  return guarded([&] {
    require(train, "train dataset");
    require(test, "test dataset");
    require(cfg, "config");
    require(checkpoint_path, "checkpoint path");
    const auto res = bavae::train::train_supervised_gnn(train->ds, test->ds, to_gnn(*cfg));
    write_file(checkpoint_path,
               [&](std::ostream& os) { os << res.checkpoint.dump() << '\n'; });
    if (metrics_path != nullptr) {
      ex::SupervisedRow row{"gnn", "test", {}};
      row.metrics.mse = res.test_mse;
      row.metrics.pearson = res.test_pearson;
      write_file(metrics_path, [&](std::ostream& os) { ex::write_supervised_csv(os, {row}); });
    }
    if (loss_path != nullptr) {
      write_file(loss_path, [&](std::ostream& os) {
        os << "epoch,loss\n";
        for (std::size_t e = 0; e < res.epoch_loss.size(); ++e) {
          os << e + 1 << ',' << bavae::csv::num(res.epoch_loss[e]) << '\n';
        }
      });
    }
  });
}

void bavae_vae_config_init(bavae_vae_config* cfg) {
  if (cfg == nullptr) return;
  const bavae::train::VAEConfig d;
  *cfg = {d.beta,
          d.epochs,
          d.batch_size,
          d.latent_dim,
          d.adam.lr,
          d.seed,
          d.conv_layers,
          d.hidden_width,
          d.head_widths.empty() ? 64 : d.head_widths[0],
          d.step_dim,
          d.lstm_hidden,
          d.weights.sym,
          d.weights.diag,
          d.weights.grow_nodes,
          d.weights.grow_edges,
          d.weights.empty_start};
}

bavae_status bavae_train_vae(const bavae_dataset* data, const bavae_vae_config* cfg,
                             const char* out_dir, const char* prefix) {
  return guarded([&] {
    require(data, "dataset");
    require(cfg, "config");
    require(out_dir, "output directory");
    const std::string pre = (prefix && *prefix) ? prefix : "vae";
    const fs::path dir(out_dir);
    const auto res = bavae::train::train_vae(data->ds, to_vae(*cfg));
    write_file((dir / (pre + "_checkpoint.json")).string(),
               [&](std::ostream& os) { os << res.checkpoint.dump() << '\n'; });
    write_file((dir / (pre + "_report.csv")).string(),
               [&](std::ostream& os) { bavae::train::write_report_csv(os, res.report); });
    write_file((dir / (pre + "_latents.csv")).string(),
               [&](std::ostream& os) { ex::write_latents_csv(os, data->ds, res.latents); });
    write_file((dir / (pre + "_factors.csv")).string(),
               [&](std::ostream& os) { ex::write_factors_csv(os, data->ds); });
  });
}

bavae_status bavae_eval_mig(const char* latents_path, const char* factors_path, int bins,
                            int m_over_n, const char* out_path, double* mig) {
  return guarded([&] {
    require(latents_path, "latents path");
    require(factors_path, "factors path");
    auto table = bavae::metrics::read_factor_table(latents_path, factors_path);
    if (m_over_n) {
      table = bavae::metrics::replace_factor(
          bavae::metrics::reparameterize_factor_m_over_n(std::move(table)), "m", "m_over_n");
    }
    const auto report = bavae::metrics::mig(table, bins);
    if (out_path != nullptr) {
      write_file(out_path, [&](std::ostream& os) { bavae::metrics::write_mig_csv(os, report); });
    }
    if (mig) *mig = report.mig;
  });
}

void bavae_assess_config_init(bavae_assess_config* cfg) {
  if (cfg == nullptr) return;
  const ex::AssessConfig d;
  *cfg = {d.replicates, d.test_graphs, d.oracle, d.seed, d.jobs};
}

bavae_status bavae_assess(const bavae_dataset* test, const char* model_path,
                          const bavae_assess_config* cfg, const char* out_dir,
                          const char* prefix, double* in_band_degree,
                          double* in_band_betweenness) {
  return guarded([&] {
    require(test, "test dataset");
    require(cfg, "config");
    require(out_dir, "output directory");
    ex::AssessConfig c{cfg->replicates, cfg->test_graphs, cfg->oracle != 0, cfg->seed,
                       cfg->jobs};
    ex::Predictor predictor;
    if (!c.oracle) {
      if (model_path == nullptr || *model_path == '\0') {
        bavae::throw_invalid("a model is required unless oracle mode is set");
      }
      predictor = load_predictor(model_path);
    }
    const auto report = ex::assess_predictions(predictor, test->ds, c);
    ex::write_assessment_outputs(out_dir, report, (prefix && *prefix) ? prefix : "assessment");
    if (in_band_degree) *in_band_degree = report.in_band_fraction_degree();
    if (in_band_betweenness) *in_band_betweenness = report.in_band_fraction_betweenness();
  });
}

void bavae_supervised_experiment_config_init(bavae_supervised_experiment_config* cfg) {
  if (cfg == nullptr) return;
  const ex::SupervisedExperimentConfig d;
  cfg->train_size = d.train_size;
  cfg->test_size = d.test_size;
  cfg->n = d.n;
  bavae_gnn_config_init(&cfg->gnn);
  bavae_forest_config_init(&cfg->rf);
  cfg->seed = d.seed;
  cfg->jobs = d.jobs;
}

bavae_status bavae_experiment_supervised(const bavae_supervised_experiment_config* cfg,
                                         const char* out_dir) {
  return guarded([&] {
    require(cfg, "config");
    require(out_dir, "output directory");
    ex::SupervisedExperimentConfig c;
    c.train_size = cfg->train_size;
    c.test_size = cfg->test_size;
    c.n = cfg->n;
    c.gnn = to_gnn(cfg->gnn);
    c.rf = to_forest(cfg->rf);
    c.seed = cfg->seed;
    c.jobs = cfg->jobs;
    ex::write_supervised_outputs(out_dir, ex::run_supervised_experiment(c));
  });
}

void bavae_vae_experiment_config_init(bavae_vae_experiment_config* cfg) {
  if (cfg == nullptr) return;
  const ex::VAEExperimentConfig d;
  cfg->graphs = d.graphs;
  cfg->n_min = d.n_min;
  cfg->n_max = d.n_max;
  cfg->bins = d.bins;
  bavae_vae_config_init(&cfg->vae);
  cfg->seed = d.seed;
}

bavae_status bavae_experiment_vae(const bavae_vae_experiment_config* cfg,
                                  const char* out_dir) {
  return guarded([&] {
    require(cfg, "config");
    require(out_dir, "output directory");
    ex::VAEExperimentConfig c;
    c.graphs = cfg->graphs;
    c.n_min = cfg->n_min;
    c.n_max = cfg->n_max;
    c.bins = cfg->bins;
    c.vae = to_vae(cfg->vae);
    c.seed = cfg->seed;
    ex::write_vae_outputs(out_dir, ex::run_vae_experiment(c));
  });
}

bavae_status bavae_report(const char* dir, const char* out_path) {
  return guarded([&] {
    require(dir, "directory");
    require(out_path, "output path");
    std::ostringstream os;
    ex::write_report(os, dir);
    write_file(out_path, [&](std::ostream& o) { o << os.str(); });
  });
}

}  // extern "C"
