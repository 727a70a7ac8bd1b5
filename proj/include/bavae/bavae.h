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

/* C interface to the bavae library. All functions return a bavae_status;
 * on failure bavae_last_error() holds a one-line message for the calling
 * thread. Handles are opaque and must be released with their _free call. */

#ifndef BAVAE_BAVAE_H_
#define BAVAE_BAVAE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(BAVAE_BUILDING_LIBRARY)
#define BAVAE_API __attribute__((visibility("default")))
#else
#define BAVAE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bavae_status {
  BAVAE_OK = 0,
  BAVAE_E_INVALID_ARGUMENT = 1,
  BAVAE_E_INFEASIBLE = 2,
  BAVAE_E_DIMENSION = 3,
  BAVAE_E_IO = 4,
  BAVAE_E_PARSE = 5,
  BAVAE_E_DIVERGED = 6,
  BAVAE_E_INTERNAL = 99
} bavae_status;

BAVAE_API const char* bavae_version(void);
BAVAE_API const char* bavae_status_name(bavae_status status);
/* Message of the last failed call on this thread; "" if none. */
BAVAE_API const char* bavae_last_error(void);

/* ---- datasets and graphs ---- */

typedef struct bavae_dataset bavae_dataset;

typedef struct bavae_dataset_spec {
  int count;
  int n_min;
  int n_max;
  int m_min;
  int m_max;
  int m_cap_by_n; /* draw m from [m_min, min(m_max, n - 1)] */
  int alpha_uniform;
  double alpha;
  double alpha_lo;
  double alpha_hi;
  double alpha_floor;
  int pad; /* 0 = n_max */
  uint64_t seed;
} bavae_dataset_spec;

BAVAE_API void bavae_dataset_spec_init(bavae_dataset_spec* spec);
BAVAE_API bavae_status bavae_dataset_generate(const bavae_dataset_spec* spec, int jobs,
                                              bavae_dataset** out);
BAVAE_API bavae_status bavae_dataset_load(const char* path, bavae_dataset** out);
BAVAE_API bavae_status bavae_dataset_save(const bavae_dataset* ds, const char* path);
BAVAE_API size_t bavae_dataset_size(const bavae_dataset* ds);
BAVAE_API int bavae_dataset_n_max(const bavae_dataset* ds);
BAVAE_API bavae_status bavae_dataset_params(const bavae_dataset* ds, size_t index, int* n,
                                            int* m, double* alpha);
BAVAE_API void bavae_dataset_free(bavae_dataset* ds);

/* format: "edges" or "dot". */
BAVAE_API bavae_status bavae_dataset_export_graph(const bavae_dataset* ds, size_t index,
                                                  const char* format, const char* path);
BAVAE_API bavae_status bavae_export_ba(int n, int m, double alpha, uint64_t seed,
                                       const char* format, const char* path);
BAVAE_API bavae_status bavae_export_er(int n, double p, uint64_t seed, const char* format,
                                       const char* path);

/* Feature CSV: id,n,m,alpha,<13 features>. */
BAVAE_API bavae_status bavae_write_features(const bavae_dataset* ds, const char* path);

/* ---- supervised models ---- */

typedef struct bavae_forest_config {
  int n_trees;
  int max_depth;          /* 0 = unbounded */
  int min_leaf;
  int features_per_split; /* 0 = ceil(width / 3) */
  int bootstrap;
  uint64_t seed;
  int jobs;
} bavae_forest_config;

BAVAE_API void bavae_forest_config_init(bavae_forest_config* cfg);

/* Fits one forest per target and writes the bundle JSON to model_path. When
 * test is non-null, a one-row metrics CSV goes to metrics_path. */
BAVAE_API bavae_status bavae_train_rf(const bavae_dataset* train, const bavae_dataset* test,
                                      const bavae_forest_config* cfg, const char* model_path,
                                      const char* metrics_path);

typedef struct bavae_gnn_config {
  int epochs;
  int batch_size;
  int conv_layers;
  int hidden_width;
  int head_width;
  int mean_pooling;
  double learning_rate;
  uint64_t seed;
} bavae_gnn_config;

BAVAE_API void bavae_gnn_config_init(bavae_gnn_config* cfg);

/* loss_path (optional) receives epoch,loss. */
BAVAE_API bavae_status bavae_train_gnn(const bavae_dataset* train, const bavae_dataset* test,
                                       const bavae_gnn_config* cfg,
                                       const char* checkpoint_path, const char* metrics_path,
                                       const char* loss_path);

/* ---- beta-VAE ---- */

typedef struct bavae_vae_config {
  double beta;
  int epochs;
  int batch_size;
  int latent_dim;
  double learning_rate;
  uint64_t seed;
  int conv_layers;
  int hidden_width;
  int head_width;
  int step_dim;
  int lstm_hidden;
  double w_sym;
  double w_diag;
  double w_grow_nodes;
  double w_grow_edges;
  double w_empty_start;
} bavae_vae_config;

BAVAE_API void bavae_vae_config_init(bavae_vae_config* cfg);

/* Writes <prefix>_checkpoint.json, <prefix>_report.csv, <prefix>_latents.csv
 * and <prefix>_factors.csv into out_dir. */
BAVAE_API bavae_status bavae_train_vae(const bavae_dataset* data, const bavae_vae_config* cfg,
                                       const char* out_dir, const char* prefix);

/* ---- evaluation ---- */

/* m_over_n != 0 replaces factor "m" by m / n before scoring. */
BAVAE_API bavae_status bavae_eval_mig(const char* latents_path, const char* factors_path,
                                      int bins, int m_over_n, const char* out_path,
                                      double* mig);

typedef struct bavae_assess_config {
  int replicates;
  int test_graphs; /* 0 = all */
  int oracle;
  uint64_t seed;
  int jobs;
} bavae_assess_config;

BAVAE_API void bavae_assess_config_init(bavae_assess_config* cfg);

/* model_path: forest bundle or supervised GNN checkpoint; may be null in
 * oracle mode. Writes <prefix>.csv and <prefix>_histograms.csv. */
BAVAE_API bavae_status bavae_assess(const bavae_dataset* test, const char* model_path,
                                    const bavae_assess_config* cfg, const char* out_dir,
                                    const char* prefix, double* in_band_degree,
                                    double* in_band_betweenness);

/* ---- experiments ---- */

typedef struct bavae_supervised_experiment_config {
  int train_size;
  int test_size;
  int n;
  bavae_gnn_config gnn;
  bavae_forest_config rf;
  uint64_t seed;
  int jobs;
} bavae_supervised_experiment_config;

BAVAE_API void bavae_supervised_experiment_config_init(bavae_supervised_experiment_config* cfg);
BAVAE_API bavae_status bavae_experiment_supervised(const bavae_supervised_experiment_config* cfg,
                                                   const char* out_dir);

typedef struct bavae_vae_experiment_config {
  int graphs;
  int n_min;
  int n_max;
  int bins;
  bavae_vae_config vae;
  uint64_t seed;
} bavae_vae_experiment_config;

BAVAE_API void bavae_vae_experiment_config_init(bavae_vae_experiment_config* cfg);
BAVAE_API bavae_status bavae_experiment_vae(const bavae_vae_experiment_config* cfg,
                                            const char* out_dir);

/* Long-format summary of every CSV in dir. */
BAVAE_API bavae_status bavae_report(const char* dir, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* BAVAE_BAVAE_H_ */
