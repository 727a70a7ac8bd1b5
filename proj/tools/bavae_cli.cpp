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

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bavae/bavae.h"

namespace {

constexpr const char* kOutDirEnv = "BAVAE_OUT_DIR";

std::string default_out_dir() {
  const char* env = std::getenv(kOutDirEnv);
  return (env != nullptr && *env != '\0') ? env : ".";
}

std::string under(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

struct Failure {
  bavae_status status;
};

void check(bavae_status s) {
  if (s != BAVAE_OK) throw Failure{s};
}

struct DatasetHandle {
  bavae_dataset* ptr = nullptr;
  DatasetHandle() = default;
  DatasetHandle(const DatasetHandle&) = delete;
  DatasetHandle& operator=(const DatasetHandle&) = delete;
  ~DatasetHandle() { bavae_dataset_free(ptr); }
};

void load(DatasetHandle& h, const std::string& path) { check(bavae_dataset_load(path.c_str(), &h.ptr)); }

const char* opt_path(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

// Common flags every subcommand carries.
struct Common {
  std::uint64_t seed = 0;
  std::string out_dir = default_out_dir();
  std::string config;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_option("--out-dir", c.out_dir, "Output directory (default $BAVAE_OUT_DIR or .)")
      ->capture_default_str();
  sub->add_option("--config", c.config, "key=value configuration file; flags take precedence");
}

struct UsageError {
  std::string message;
};

// Required options are checked after the config file is applied, so either
// source may supply them.
std::vector<std::pair<const CLI::App*, CLI::Option*>>& needed() {
  static std::vector<std::pair<const CLI::App*, CLI::Option*>> v;
  return v;
}

void need(const CLI::App* sub, CLI::Option* op) {
  op->description(op->get_description().empty() ? "(required)"
                                                : op->get_description() + " (required)");
  needed().emplace_back(sub, op);
}

// Fills options absent from the command line. Keys are long option names;
// keys under a [section] only apply to the subcommand of that name.
void apply_config(CLI::App* sub, const std::string& path,
                  const std::set<std::string>& given) {
  if (!std::ifstream(path)) throw UsageError{"cannot open config file " + path};
  for (const auto& item : CLI::ConfigBase().from_file(path)) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() &&
        !(item.parents.size() == 1 && item.parents[0] == sub->get_name())) {
      continue;
    }
    if (item.name == "config") throw UsageError{"config files cannot nest"};
    CLI::Option* op = sub->get_option_no_throw("--" + item.name);
    if (op == nullptr) op = sub->get_option_no_throw(item.name);
    if (op == nullptr) throw UsageError{"unknown config key " + item.name};
    bool on_command_line = op->get_lnames().empty() && op->count() > 0;
    for (const auto& l : op->get_lnames()) on_command_line |= given.count(l) > 0;
    if (on_command_line) continue;
    op->clear();
    if (op->get_expected_min() == 0) {
      const std::string v = item.inputs.empty() ? "true" : item.inputs.front();
      if (v == "true" || v == "1" || v == "yes" || v == "on") {
        op->add_result(std::string("1"));
      } else if (v == "false" || v == "0" || v == "no" || v == "off") {
        op->add_result(std::string("0"));
      } else {
        throw UsageError{"bad flag value for " + item.name + ": " + v};
      }
      op->run_callback();
      continue;
    }
    op->add_result(item.inputs);
    op->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bavae: preferential-attachment graphs, parameter recovery and beta-VAE"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bavae_version()));

  std::function<void()> run;

  // ---- generate
  Common gen_c;
  bavae_dataset_spec spec;
  bavae_dataset_spec_init(&spec);
  int gen_n = 0, gen_m = 1, gen_jobs = 1;
  double alpha_lo = 0, alpha_hi = 0, gen_p = 0.1;
  std::string gen_model = "dataset", gen_format = "edges", gen_out;
  int export_index = -1;
  std::string export_path;
  auto* gen = app.add_subcommand("generate", "Generate a BA dataset or a single BA/ER graph");
  add_common(gen, gen_c);
  gen->add_option("--model", gen_model, "dataset | ba | er")
      ->check(CLI::IsMember({"dataset", "ba", "er"}))
      ->capture_default_str();
  gen->add_option("--count", spec.count, "Number of graphs")->capture_default_str();
  gen->add_option("--n", gen_n, "Fixed node count");
  gen->add_option("--n-min", spec.n_min)->capture_default_str();
  gen->add_option("--n-max", spec.n_max)->capture_default_str();
  gen->add_option("--m", gen_m, "m for a single BA graph")->capture_default_str();
  gen->add_option("--m-min", spec.m_min)->capture_default_str();
  gen->add_option("--m-max", spec.m_max)->capture_default_str();
  gen->add_flag("--m-cap-by-n", spec.m_cap_by_n, "Cap m at n - 1 per graph");
  gen->add_option("--alpha", spec.alpha, "Fixed alpha")->capture_default_str();
  auto* lo_opt = gen->add_option("--alpha-lo", alpha_lo, "Uniform alpha lower bound");
  auto* hi_opt = gen->add_option("--alpha-hi", alpha_hi, "Uniform alpha upper bound");
  lo_opt->needs(hi_opt);
  hi_opt->needs(lo_opt);
  gen->add_option("--alpha-floor", spec.alpha_floor)->capture_default_str();
  gen->add_option("--pad", spec.pad, "Adjacency padding (0 = n_max)")->capture_default_str();
  gen->add_option("--p", gen_p, "ER linking probability")->capture_default_str();
  gen->add_option("--format", gen_format, "Graph export format")
      ->check(CLI::IsMember({"edges", "dot"}))
      ->capture_default_str();
  gen->add_option("--export-index", export_index, "Also export this dataset graph");
  gen->add_option("--export", export_path, "Path for --export-index");
  gen->add_option("--jobs", gen_jobs)->capture_default_str();
  gen->add_option("--out", gen_out, "Output file");
  gen->callback([&] {
    run = [&] {
      if (gen_n > 0) spec.n_min = spec.n_max = gen_n;
      spec.seed = gen_c.seed;
      if (gen_model == "ba" || gen_model == "er") {
        const int n = gen_n > 0 ? gen_n : spec.n_max;
        const std::string out =
            gen_out.empty() ? under(gen_c.out_dir, gen_format == "dot" ? "graph.dot" : "graph.edges")
                            : gen_out;
        if (gen_model == "ba") {
          check(bavae_export_ba(n, gen_m, spec.alpha, gen_c.seed, gen_format.c_str(), out.c_str()));
        } else {
          check(bavae_export_er(n, gen_p, gen_c.seed, gen_format.c_str(), out.c_str()));
        }
        return;
      }
      if (lo_opt->count() > 0) {
        spec.alpha_uniform = 1;
        spec.alpha_lo = alpha_lo;
        spec.alpha_hi = alpha_hi;
      }
      DatasetHandle ds;
      check(bavae_dataset_generate(&spec, gen_jobs, &ds.ptr));
      const std::string out = gen_out.empty() ? under(gen_c.out_dir, "dataset.jsonl") : gen_out;
      check(bavae_dataset_save(ds.ptr, out.c_str()));
      if (export_index >= 0) {
        const std::string path =
            export_path.empty() ? under(gen_c.out_dir, "graph_" + std::to_string(export_index) +
                                                           (gen_format == "dot" ? ".dot" : ".edges"))
                                : export_path;
        check(bavae_dataset_export_graph(ds.ptr, static_cast<size_t>(export_index),
                                         gen_format.c_str(), path.c_str()));
      }
    };
  });

  // ---- features
  Common feat_c;
  std::string feat_data, feat_out;
  auto* feat = app.add_subcommand("features", "Write the feature CSV of a dataset");
  add_common(feat, feat_c);
  need(feat, feat->add_option("--data", feat_data, "Dataset JSONL"));
  feat->add_option("--out", feat_out, "Output CSV");
  feat->callback([&] {
    run = [&] {
      DatasetHandle ds;
      load(ds, feat_data);
      const std::string out = feat_out.empty() ? under(feat_c.out_dir, "features.csv") : feat_out;
      check(bavae_write_features(ds.ptr, out.c_str()));
    };
  });

  // ---- train-rf
  Common rf_c;
  bavae_forest_config rf;
  bavae_forest_config_init(&rf);
  std::string rf_train, rf_test, rf_model, rf_metrics;
  bool rf_no_bootstrap = false;
  auto* trf = app.add_subcommand("train-rf", "Fit random-forest regressors for (n, m, alpha)");
  add_common(trf, rf_c);
  need(trf, trf->add_option("--train", rf_train, "Training dataset"));
  trf->add_option("--test", rf_test, "Test dataset for metrics");
  trf->add_option("--trees", rf.n_trees)->capture_default_str();
  trf->add_option("--max-depth", rf.max_depth, "0 = unbounded")->capture_default_str();
  trf->add_option("--min-leaf", rf.min_leaf)->capture_default_str();
  trf->add_option("--mtry", rf.features_per_split, "0 = ceil(width / 3)")->capture_default_str();
  trf->add_flag("--no-bootstrap", rf_no_bootstrap);
  trf->add_option("--jobs", rf.jobs)->capture_default_str();
  trf->add_option("--model-out", rf_model);
  trf->add_option("--metrics-out", rf_metrics);
  trf->callback([&] {
    run = [&] {
      rf.seed = rf_c.seed;
      rf.bootstrap = rf_no_bootstrap ? 0 : 1;
      DatasetHandle train, test;
      load(train, rf_train);
      if (!rf_test.empty()) load(test, rf_test);
      const std::string model = rf_model.empty() ? under(rf_c.out_dir, "forest.json") : rf_model;
      const std::string metrics =
          rf_metrics.empty() ? under(rf_c.out_dir, "rf_metrics.csv") : rf_metrics;
      check(bavae_train_rf(train.ptr, test.ptr, &rf, model.c_str(), metrics.c_str()));
    };
  });

  // ---- train-gnn
  Common gnn_c;
  bavae_gnn_config gnn;
  bavae_gnn_config_init(&gnn);
  std::string gnn_train, gnn_test, gnn_ckpt, gnn_metrics, gnn_loss, gnn_pool = "sum";
  auto* tg = app.add_subcommand("train-gnn", "Train the graph-convolutional parameter regressor");
  add_common(tg, gnn_c);
  need(tg, tg->add_option("--train", gnn_train));
  need(tg, tg->add_option("--test", gnn_test));
  tg->add_option("--epochs", gnn.epochs)->capture_default_str();
  tg->add_option("--batch-size", gnn.batch_size)->capture_default_str();
  tg->add_option("--conv-layers", gnn.conv_layers)->capture_default_str();
  tg->add_option("--hidden", gnn.hidden_width)->capture_default_str();
  tg->add_option("--head", gnn.head_width)->capture_default_str();
  tg->add_option("--pooling", gnn_pool)->check(CLI::IsMember({"sum", "mean"}))->capture_default_str();
  tg->add_option("--lr", gnn.learning_rate)->capture_default_str();
  tg->add_option("--checkpoint-out", gnn_ckpt);
  tg->add_option("--metrics-out", gnn_metrics);
  tg->add_option("--loss-out", gnn_loss);
  tg->callback([&] {
    run = [&] {
      gnn.seed = gnn_c.seed;
      gnn.mean_pooling = gnn_pool == "mean";
      DatasetHandle train, test;
      load(train, gnn_train);
      load(test, gnn_test);
      const std::string ckpt = gnn_ckpt.empty() ? under(gnn_c.out_dir, "gnn_checkpoint.json") : gnn_ckpt;
      const std::string metrics =
          gnn_metrics.empty() ? under(gnn_c.out_dir, "gnn_metrics.csv") : gnn_metrics;
      const std::string loss = gnn_loss.empty() ? under(gnn_c.out_dir, "gnn_loss.csv") : gnn_loss;
      check(bavae_train_gnn(train.ptr, test.ptr, &gnn, ckpt.c_str(), metrics.c_str(), loss.c_str()));
    };
  });

  // ---- train-vae
  Common vae_c;
  bavae_vae_config vae;
  bavae_vae_config_init(&vae);
  std::string vae_data, vae_prefix = "vae";
  auto* tv = app.add_subcommand("train-vae", "Train the beta-VAE on a dataset");
  add_common(tv, vae_c);
  need(tv, tv->add_option("--data", vae_data));
  tv->add_option("--beta", vae.beta)->capture_default_str();
  tv->add_option("--epochs", vae.epochs)->capture_default_str();
  tv->add_option("--batch-size", vae.batch_size)->capture_default_str();
  tv->add_option("--latent-dim", vae.latent_dim)->capture_default_str();
  tv->add_option("--lr", vae.learning_rate)->capture_default_str();
  tv->add_option("--conv-layers", vae.conv_layers)->capture_default_str();
  tv->add_option("--hidden", vae.hidden_width)->capture_default_str();
  tv->add_option("--head", vae.head_width)->capture_default_str();
  tv->add_option("--step-dim", vae.step_dim)->capture_default_str();
  tv->add_option("--lstm-hidden", vae.lstm_hidden)->capture_default_str();
  tv->add_option("--w-sym", vae.w_sym)->capture_default_str();
  tv->add_option("--w-diag", vae.w_diag)->capture_default_str();
  tv->add_option("--w-grow-nodes", vae.w_grow_nodes)->capture_default_str();
  tv->add_option("--w-grow-edges", vae.w_grow_edges)->capture_default_str();
  tv->add_option("--w-empty-start", vae.w_empty_start)->capture_default_str();
  tv->add_option("--prefix", vae_prefix)->capture_default_str();
  tv->callback([&] {
    run = [&] {
      vae.seed = vae_c.seed;
      DatasetHandle ds;
      load(ds, vae_data);
      check(bavae_train_vae(ds.ptr, &vae, vae_c.out_dir.c_str(), vae_prefix.c_str()));
    };
  });

  // ---- eval-mig
  Common mig_c;
  std::string mig_latents, mig_factors, mig_out;
  int mig_bins = 20;
  bool mig_ratio = false;
  auto* em = app.add_subcommand("eval-mig", "Mutual Information Gap of latents against factors");
  add_common(em, mig_c);
  need(em, em->add_option("--latents", mig_latents));
  need(em, em->add_option("--factors", mig_factors));
  em->add_option("--bins", mig_bins)->capture_default_str();
  em->add_flag("--m-over-n", mig_ratio, "Score m / n in place of m");
  em->add_option("--out", mig_out);
  em->callback([&] {
    run = [&] {
      const std::string out = mig_out.empty() ? under(mig_c.out_dir, "mig.csv") : mig_out;
      double value = 0;
      check(bavae_eval_mig(mig_latents.c_str(), mig_factors.c_str(), mig_bins, mig_ratio ? 1 : 0,
                           out.c_str(), &value));
      std::printf("%s\n", out.c_str());
    };
  });

  // ---- assess
  Common as_c;
  bavae_assess_config as;
  bavae_assess_config_init(&as);
  std::string as_data, as_model, as_prefix = "assessment";
  bool as_oracle = false;
  auto* asc = app.add_subcommand("assess", "Replicate-distribution check of predicted parameters");
  add_common(asc, as_c);
  need(asc, asc->add_option("--data", as_data, "Test dataset"));
  asc->add_option("--model", as_model, "Forest bundle or supervised GNN checkpoint");
  asc->add_flag("--oracle", as_oracle, "Use the true parameters");
  asc->add_option("--replicates", as.replicates)->capture_default_str();
  asc->add_option("--test-graphs", as.test_graphs, "0 = all")->capture_default_str();
  asc->add_option("--jobs", as.jobs)->capture_default_str();
  asc->add_option("--prefix", as_prefix)->capture_default_str();
  asc->callback([&] {
    run = [&] {
      as.seed = as_c.seed;
      as.oracle = as_oracle ? 1 : 0;
      DatasetHandle ds;
      load(ds, as_data);
      double deg = 0, bc = 0;
      check(bavae_assess(ds.ptr, opt_path(as_model), &as, as_c.out_dir.c_str(), as_prefix.c_str(),
                         &deg, &bc));
      std::printf("in_band_degree=%.6g in_band_betweenness=%.6g\n", deg, bc);
    };
  });

  // ---- report
  Common rep_c;
  std::string rep_dir, rep_out;
  auto* rep = app.add_subcommand("report", "Bundle every CSV of a run directory into one table");
  add_common(rep, rep_c);
  rep->add_option("--dir", rep_dir, "Run directory (default --out-dir)");
  rep->add_option("--out", rep_out, "Output CSV (default <dir>/report.csv)");
  rep->callback([&] {
    run = [&] {
      const std::string dir = rep_dir.empty() ? rep_c.out_dir : rep_dir;
      const std::string out = rep_out.empty() ? under(dir, "report.csv") : rep_out;
      check(bavae_report(dir.c_str(), out.c_str()));
    };
  });

  // ---- experiment
  Common exp_c;
  bavae_supervised_experiment_config sx;
  bavae_supervised_experiment_config_init(&sx);
  bavae_vae_experiment_config vx;
  bavae_vae_experiment_config_init(&vx);
  std::string exp_kind;
  auto* exp = app.add_subcommand("experiment", "Run a full experiment pipeline");
  add_common(exp, exp_c);
  exp->add_option("kind", exp_kind, "supervised | vae")
      ->required()
      ->check(CLI::IsMember({"supervised", "vae"}));
  exp->add_option("--train-size", sx.train_size)->capture_default_str();
  exp->add_option("--test-size", sx.test_size)->capture_default_str();
  exp->add_option("--n", sx.n)->capture_default_str();
  exp->add_option("--gnn-epochs", sx.gnn.epochs)->capture_default_str();
  exp->add_option("--gnn-lr", sx.gnn.learning_rate)->capture_default_str();
  exp->add_option("--gnn-batch-size", sx.gnn.batch_size)->capture_default_str();
  exp->add_option("--trees", sx.rf.n_trees)->capture_default_str();
  exp->add_option("--jobs", sx.jobs)->capture_default_str();
  exp->add_option("--graphs", vx.graphs)->capture_default_str();
  exp->add_option("--n-min", vx.n_min)->capture_default_str();
  exp->add_option("--n-max", vx.n_max)->capture_default_str();
  exp->add_option("--bins", vx.bins)->capture_default_str();
  exp->add_option("--beta", vx.vae.beta)->capture_default_str();
  exp->add_option("--epochs", vx.vae.epochs)->capture_default_str();
  exp->add_option("--batch-size", vx.vae.batch_size)->capture_default_str();
  exp->add_option("--lr", vx.vae.learning_rate)->capture_default_str();
  exp->callback([&] {
    run = [&] {
      if (exp_kind == "supervised") {
        sx.seed = exp_c.seed;
        check(bavae_experiment_supervised(&sx, exp_c.out_dir.c_str()));
      } else {
        vx.seed = exp_c.seed;
        check(bavae_experiment_vae(&vx, exp_c.out_dir.c_str()));
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: code=usage status=2 message=" << e.what() << "\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    std::cerr << (sub ? sub->help() : app.help());
    return 2;
  }

  try {
    std::set<std::string> given;
    for (int i = 1; i < argc; ++i) {
      const std::string a = argv[i];
      if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') - 2));
    }
    for (auto* sub : app.get_subcommands()) {
      const auto* opt = sub->get_option_no_throw("--config");
      if (opt != nullptr && opt->count() > 0) apply_config(sub, opt->as<std::string>(), given);
      for (const auto& [owner, op] : needed()) {
        if (owner == sub && op->count() == 0) {
          throw UsageError{op->get_name() + " is required"};
        }
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "error: code=usage status=2 message=" << e.message << "\n";
    return 2;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: code=usage status=2 message=" << e.what() << "\n";
    return 2;
  }

  try {
    run();
  } catch (const Failure& f) {
    std::cerr << "error: code=" << bavae_status_name(f.status)
              << " status=" << static_cast<int>(f.status) << " message=" << bavae_last_error()
              << "\n";
    return static_cast<int>(f.status);
  }
  return 0;
}
