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

#ifndef BAVAE_TRAINING_HPP_
#define BAVAE_TRAINING_HPP_

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "bavae/dataset.hpp"
#include "bavae/models.hpp"
#include "bavae/optim.hpp"

namespace bavae::train {

using ad::Tensor;

// z = mu + exp(logvar / 2) * eps.
Tensor reparameterize(const Tensor& mu, const Tensor& logvar, const Tensor& eps);

// 1/2 sum(exp(logvar) + mu^2 - 1 - logvar) over every entry.
Tensor kl_gauss(const Tensor& mu, const Tensor& logvar);

struct ConstraintWeights {
  double sym = 1.0;
  double diag = 1.0;
  double grow_nodes = 1.0;
  double grow_edges = 1.0;
  double empty_start = 1.0;
};

struct ReconstructionLoss {
  Tensor total;  // batch mean of the weighted sum below
  // Unweighted batch means of each term.
  double bce = 0;
  double sym = 0;
  double diag = 0;
  double grow_nodes = 0;
  double grow_edges = 0;
  double empty_start = 0;
};

// Decoder output for a batch: step_logits[t] is B x pairs, n_nodes[b] the
// true node count of sample b (its final live block).
struct DecodedBatch {
  std::vector<Tensor> step_logits;
  std::vector<int> n_nodes;
  int n_max = 0;
};

// BCE of the final step against `targets` (B x pairs, upper triangle) over
// each sample's live block, plus the weighted structural penalties summed
// over steps: symmetry, diagonal, one-sided growth of edge mass and of the
// soft count of non-isolated nodes, and mass of the first step.
ReconstructionLoss reconstruction_loss(const DecodedBatch& decoded,
                                       const Tensor& targets,
                                       const ConstraintWeights& weights,
                                       int expected_steps);

// Upper-triangle {0,1} row of a graph in decoder pair order.
std::vector<double> target_pairs(const Graph& g, int n_max);

// ---- supervised parameter regression --------------------------------------

struct SupervisedConfig {
  nn::GNNEncoderConfig encoder;  // output_dim forced to 3 (n, m, alpha)
  int epochs = 20;
  int batch_size = 32;
  ad::AdamConfig adam;
  std::uint64_t seed = 0;
};

struct TargetStats {
  std::array<double, 3> mean{};
  std::array<double, 3> std{};  // 1 where the training column is constant
};

struct SupervisedResult {
  nlohmann::json checkpoint;
  std::vector<double> epoch_loss;
  TargetStats stats;
  std::array<double, 3> test_mse{};
  // Empty where the true test column has zero variance.
  std::array<std::optional<double>, 3> test_pearson;
  std::vector<std::array<double, 3>> test_predictions;
};

inline constexpr std::array<const char*, 3> kTargetNames = {"n", "m", "alpha"};

SupervisedResult train_supervised_gnn(const Dataset& train, const Dataset& test,
                                      const SupervisedConfig& config);

// Rebuilds the encoder from a supervised checkpoint and predicts (n, m,
// alpha) in original units.
class ParameterPredictor {
 public:
  explicit ParameterPredictor(const nlohmann::json& checkpoint);
  std::array<double, 3> predict(const Graph& g) const;

 private:
  ad::ParamSet params_;
  std::unique_ptr<nn::GNNEncoder> encoder_;
  TargetStats stats_;
};

// ---- beta-VAE --------------------------------------------------------------

struct VAEConfig {
  double beta = 4.0;
  int epochs = 200;
  int batch_size = 16;
  int latent_dim = 3;
  ConstraintWeights weights;
  ad::AdamConfig adam;
  std::uint64_t seed = 0;
  // Encoder widths (n_max and output_dim come from the data and latent_dim).
  int conv_layers = 3;
  int hidden_width = 64;
  std::vector<int> head_widths = {64};
  nn::Pooling pooling = nn::Pooling::kSum;
  int step_dim = 32;
  int lstm_hidden = 128;

  void validate() const;
  nlohmann::json to_json() const;
  static VAEConfig from_json(const nlohmann::json& j);
};

struct EpochStats {
  double total = 0;
  double bce = 0;
  double kl = 0;
  double sym = 0;
  double diag = 0;
  double grow_nodes = 0;
  double grow_edges = 0;
  double empty_start = 0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  double wall_seconds = 0;  // not part of the CSV
};

void write_report_csv(std::ostream& os, const TrainReport& report);

class VAEModel {
 public:
  VAEModel(const VAEConfig& config, int n_max);

  struct Output {
    Tensor mu, logvar, z;
    DecodedBatch decoded;
  };

  // Encodes each graph, samples z with `eps` (B x J; zeros give z = mu) and
  // decodes.
  Output forward(const std::vector<const nn::GraphInput*>& inputs,
                 const std::vector<int>& n_nodes, const Tensor& eps) const;
  // Posterior means, one row per graph.
  std::vector<std::vector<double>> posterior_means(const Dataset& ds) const;

  ad::ParamSet& params() { return params_; }
  const ad::ParamSet& params() const { return params_; }
  const nn::GNNEncoder& encoder() const { return *encoder_; }
  const nn::SequentialDecoder& decoder() const { return *decoder_; }
  const VAEConfig& config() const { return config_; }
  int n_max() const { return n_max_; }

 private:
  VAEConfig config_;
  int n_max_;
  ad::ParamSet params_;
  std::unique_ptr<nn::GNNEncoder> encoder_;
  std::unique_ptr<nn::SequentialDecoder> decoder_;
};

struct VAELoss {
  Tensor total;
  ReconstructionLoss recon;
  double kl = 0;  // batch mean
};

VAELoss vae_loss(const VAEModel& model, const VAEModel::Output& out,
                 const Tensor& targets);

struct VAEResult {
  nlohmann::json checkpoint;
  TrainReport report;
  std::vector<std::vector<double>> latents;  // posterior means
};

// Throws DivergenceError (with the epoch index) on NaN or loss > 1e6.
VAEResult train_vae(const Dataset& data, const VAEConfig& config);

}  // namespace bavae::train

#endif  // BAVAE_TRAINING_HPP_
