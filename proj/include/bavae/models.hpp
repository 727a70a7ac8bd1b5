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

#ifndef BAVAE_MODELS_HPP_
#define BAVAE_MODELS_HPP_

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bavae/graph.hpp"
#include "bavae/optim.hpp"
#include "bavae/rng.hpp"
#include "bavae/tensor.hpp"

namespace bavae::nn {

using ad::Tensor;

enum class Pooling { kSum, kMean };

// Per-node input features: [1, degree / (n_max - 1)] on live nodes, zeros on
// padding.
inline constexpr int kNodeInputDim = 2;

struct GNNEncoderConfig {
  int n_max = 50;
  int conv_layers = 3;
  int hidden_width = 64;
  Pooling pooling = Pooling::kSum;
  std::vector<int> head_widths = {64};
  int output_dim = 3;

  void validate() const;
  nlohmann::json to_json() const;
  static GNNEncoderConfig from_json(const nlohmann::json& j);
};

// Constant encoder inputs for one graph.
struct GraphInput {
  Tensor a_norm;    // n_pad x n_pad
  Tensor features;  // n_pad x kNodeInputDim
  int n_nodes = 0;
};

// D^{-1/2} (A + I) D^{-1/2} over live nodes; padded rows and columns are 0.
Tensor normalized_adjacency(const Graph& g);
GraphInput prepare_graph(const Graph& g, int feature_n_max);

// ReLU(A_norm H W). No bias, so zero rows of A_norm give zero output rows.
Tensor graph_conv(const Tensor& a_norm, const Tensor& h, const Tensor& w);

// Fills with U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor init_uniform(ad::Shape shape, std::size_t fan_in, Rng& rng);

class GNNEncoder {
 public:
  GNNEncoder(GNNEncoderConfig config, ad::ParamSet& params, Rng& rng,
             const std::string& prefix = "encoder");

  // 1 x output_dim. Invariant to node relabelling and to extra padding.
  Tensor encode(const GraphInput& input) const;
  Tensor encode(const Graph& g) const;

  const GNNEncoderConfig& config() const { return config_; }

 private:
  GNNEncoderConfig config_;
  std::vector<Tensor> conv_w_;
  std::vector<Tensor> head_w_;
  std::vector<Tensor> head_b_;
};

struct DecoderConfig {
  int n_max = 12;
  int steps = 0;  // 0 = n_max (one node added per step)
  int latent_dim = 3;
  int step_dim = 32;
  int hidden = 128;

  int step_count() const { return steps == 0 ? n_max : steps; }
  int pair_count() const { return n_max * (n_max - 1) / 2; }
  void validate() const;
  nlohmann::json to_json() const;
  static DecoderConfig from_json(const nlohmann::json& j);
};

// Upper-triangle pair order: (0,1), (0,2), ..., (0,n-1), (1,2), ...
int pair_index(int i, int j, int n_max);
// Column maps for gather_cols over flattened n_max x n_max matrices.
std::vector<int> symmetric_scatter_index(int n_max);  // pairs -> matrix
std::vector<int> transpose_index(int n_max);
std::vector<int> diagonal_index(int n_max);
// 1 for pairs inside the leading `live` x `live` block.
std::vector<double> live_pair_mask(int live, int n_max);
// Live node count of step t for a graph with n nodes.
inline int live_nodes_at(int step, int n_nodes) {
  return std::min(step + 1, n_nodes);
}

// Affine map z -> N step representations of width d, laid out as one
// B x (N * d) row per sample; equivalent to a 1-D transposed convolution
// with kernel covering the whole output.
class DeconvExpand {
 public:
  DeconvExpand(int latent_dim, int steps, int step_dim, ad::ParamSet& params,
               Rng& rng, const std::string& prefix = "deconv");
  Tensor expand(const Tensor& z) const;
  Tensor step_input(const Tensor& expanded, int t) const;

 private:
  int steps_, step_dim_;
  Tensor w_, b_;
};

struct LSTMState {
  Tensor h;
  Tensor c;
};

// Gates i, f, o = sigmoid, g = tanh; c' = f*c + i*g, h' = o*tanh(c').
// The output head maps h' to upper-triangle adjacency logits.
class LSTMCell {
 public:
  LSTMCell(int input_dim, int hidden, int output_dim, ad::ParamSet& params,
           Rng& rng, const std::string& prefix = "lstm");
  std::pair<LSTMState, Tensor> step(const Tensor& x,
                                    const LSTMState& state) const;
  LSTMState zero_state(std::size_t batch) const;

  int hidden() const { return hidden_; }
  Tensor bias() const { return b_; }
  Tensor input_weight() const { return wx_; }
  Tensor recurrent_weight() const { return wh_; }
  Tensor head_weight() const { return wo_; }
  Tensor head_bias() const { return bo_; }

 private:
  int hidden_;
  Tensor wx_, wh_, b_, wo_, bo_;
};

class SequentialDecoder {
 public:
  SequentialDecoder(DecoderConfig config, ad::ParamSet& params, Rng& rng);

  // Per-step upper-triangle logits, each B x pair_count.
  std::vector<Tensor> step_logits(const Tensor& z) const;
  // Per-step soft adjacency, each B x n_max^2 (row-major matrices), with
  // probabilities outside the live block of each sample set to 0. Symmetric
  // with zero diagonal by construction.
  std::vector<Tensor> decode_sequence(const Tensor& z,
                                      const std::vector<int>& n_nodes) const;

  const DecoderConfig& config() const { return config_; }
  const DeconvExpand& deconv() const { return deconv_; }
  const LSTMCell& cell() const { return cell_; }

 private:
  DecoderConfig config_;
  DeconvExpand deconv_;
  LSTMCell cell_;
};

// sigmoid(logits) masked to each sample's live block at step t.
Tensor masked_probs(const Tensor& logits, int step,
                    const std::vector<int>& n_nodes, int n_max);
Tensor step_mask(int step, const std::vector<int>& n_nodes, int n_max);

}  // namespace bavae::nn

#endif  // BAVAE_MODELS_HPP_
