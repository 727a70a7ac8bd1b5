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

#include "bavae/models.hpp"

#include <cmath>

#include "bavae/error.hpp"

namespace bavae::nn {

using ad::Shape;

void GNNEncoderConfig::validate() const {
  if (n_max < 2 || conv_layers < 0 || hidden_width < 1 || output_dim < 1) {
    throw_invalid("encoder config: need n_max >= 2, hidden_width >= 1, "
                  "output_dim >= 1");
  }
  for (int w : head_widths) {
    if (w < 1) throw_invalid("encoder config: head widths must be >= 1");
  }
}

nlohmann::json GNNEncoderConfig::to_json() const {
  return {{"n_max", n_max},
          {"conv_layers", conv_layers},
          {"hidden_width", hidden_width},
          {"pooling", pooling == Pooling::kSum ? "sum" : "mean"},
          {"head_widths", head_widths},
          {"output_dim", output_dim}};
}

GNNEncoderConfig GNNEncoderConfig::from_json(const nlohmann::json& j) {
  GNNEncoderConfig c;
  c.n_max = j.at("n_max").get<int>();
  c.conv_layers = j.at("conv_layers").get<int>();
  c.hidden_width = j.at("hidden_width").get<int>();
  c.pooling = j.at("pooling").get<std::string>() == "mean" ? Pooling::kMean
                                                           : Pooling::kSum;
  c.head_widths = j.at("head_widths").get<std::vector<int>>();
  c.output_dim = j.at("output_dim").get<int>();
  return c;
}

Tensor normalized_adjacency(const Graph& g) {
  const int n = g.n_max();
  const int live = g.n_nodes();
  std::vector<double> inv_sqrt(n, 0.0);
  for (int v = 0; v < live; ++v) {
    inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v) + 1));
  }
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  for (int u = 0; u < live; ++u) {
    for (int v = 0; v < live; ++v) {
      if (u == v || g.has_edge(u, v)) {
        a[static_cast<std::size_t>(u) * n + v] = inv_sqrt[u] * inv_sqrt[v];
      }
    }
  }
  return Tensor::matrix(n, n, std::move(a));
}

GraphInput prepare_graph(const Graph& g, int feature_n_max) {
  GraphInput in;
  in.n_nodes = g.n_nodes();
  in.a_norm = normalized_adjacency(g);
  const int n = g.n_max();
  std::vector<double> f(static_cast<std::size_t>(n) * kNodeInputDim, 0.0);
  const double norm = 1.0 / static_cast<double>(std::max(1, feature_n_max - 1));
  for (int v = 0; v < g.n_nodes(); ++v) {
    f[v * kNodeInputDim] = 1.0;
    f[v * kNodeInputDim + 1] = g.degree(v) * norm;
  }
  in.features = Tensor::matrix(n, kNodeInputDim, std::move(f));
  return in;
}

Tensor graph_conv(const Tensor& a_norm, const Tensor& h, const Tensor& w) {
  return ad::relu(ad::matmul(a_norm, ad::matmul(h, w)));
}

Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> data(ad::shape_size(shape));
  for (double& x : data) x = rng.uniform(-bound, bound);
  return Tensor(std::move(shape), std::move(data), true);
}

GNNEncoder::GNNEncoder(GNNEncoderConfig config, ad::ParamSet& params, Rng& rng,
                       const std::string& prefix)
    : config_(std::move(config)) {
  config_.validate();
  std::size_t in = kNodeInputDim;
  for (int l = 0; l < config_.conv_layers; ++l) {
    const std::size_t out = config_.hidden_width;
    conv_w_.push_back(params.add(prefix + ".conv" + std::to_string(l) + ".w",
                                 init_uniform({in, out}, in, rng)));
    in = out;
  }
  auto add_dense = [&](std::size_t out, int idx) {
    const std::string name = prefix + ".head" + std::to_string(idx);
    head_w_.push_back(params.add(name + ".w", init_uniform({in, out}, in, rng)));
    head_b_.push_back(params.add(name + ".b", init_uniform({1, out}, in, rng)));
    in = out;
  };
  int idx = 0;
  for (int w : config_.head_widths) add_dense(w, idx++);
  add_dense(config_.output_dim, idx);
}

Tensor GNNEncoder::encode(const GraphInput& input) const {
  if (input.n_nodes > config_.n_max) {
    throw_invalid("encoder: graph has " + std::to_string(input.n_nodes) +
                  " nodes, encoder n_max is " + std::to_string(config_.n_max));
  }
  Tensor h = input.features;
  for (const auto& w : conv_w_) h = graph_conv(input.a_norm, h, w);
  Tensor pooled = ad::sum(h, 0);
  if (config_.pooling == Pooling::kMean) {
    pooled = ad::scale(pooled, 1.0 / std::max(1, input.n_nodes));
  }
  Tensor x = pooled;
  for (std::size_t k = 0; k < head_w_.size(); ++k) {
    x = ad::add(ad::matmul(x, head_w_[k]), head_b_[k]);
    if (k + 1 < head_w_.size()) x = ad::relu(x);
  }
  return x;
}

Tensor GNNEncoder::encode(const Graph& g) const {
  return encode(prepare_graph(g, config_.n_max));
}

void DecoderConfig::validate() const {
  if (n_max < 2 || step_count() < 1 || latent_dim < 1 || step_dim < 1 ||
      hidden < 1) {
    throw_invalid("decoder config: need n_max >= 2 and positive widths");
  }
}

nlohmann::json DecoderConfig::to_json() const {
  return {{"n_max", n_max},
          {"steps", step_count()},
          {"latent_dim", latent_dim},
          {"step_dim", step_dim},
          {"hidden", hidden}};
}

DecoderConfig DecoderConfig::from_json(const nlohmann::json& j) {
  DecoderConfig c;
  c.n_max = j.at("n_max").get<int>();
  c.steps = j.at("steps").get<int>();
  c.latent_dim = j.at("latent_dim").get<int>();
  c.step_dim = j.at("step_dim").get<int>();
  c.hidden = j.at("hidden").get<int>();
  return c;
}

int pair_index(int i, int j, int n_max) {
  if (i > j) std::swap(i, j);
  return i * (2 * n_max - i - 1) / 2 + (j - i - 1);
}

std::vector<int> symmetric_scatter_index(int n_max) {
  std::vector<int> idx(static_cast<std::size_t>(n_max) * n_max, -1);
  for (int i = 0; i < n_max; ++i) {
    for (int j = 0; j < n_max; ++j) {
      if (i != j) idx[i * n_max + j] = pair_index(i, j, n_max);
    }
  }
  return idx;
}

std::vector<int> transpose_index(int n_max) {
  std::vector<int> idx(static_cast<std::size_t>(n_max) * n_max);
  for (int i = 0; i < n_max; ++i) {
    for (int j = 0; j < n_max; ++j) idx[i * n_max + j] = j * n_max + i;
  }
  return idx;
}

std::vector<int> diagonal_index(int n_max) {
  std::vector<int> idx(n_max);
  for (int i = 0; i < n_max; ++i) idx[i] = i * n_max + i;
  return idx;
}

std::vector<double> live_pair_mask(int live, int n_max) {
  std::vector<double> mask(static_cast<std::size_t>(n_max) * (n_max - 1) / 2, 0.0);
  for (int i = 0; i < live; ++i) {
    for (int j = i + 1; j < live; ++j) mask[pair_index(i, j, n_max)] = 1.0;
  }
  return mask;
}

DeconvExpand::DeconvExpand(int latent_dim, int steps, int step_dim,
                           ad::ParamSet& params, Rng& rng,
                           const std::string& prefix)
    : steps_(steps), step_dim_(step_dim) {
  const std::size_t out = static_cast<std::size_t>(steps) * step_dim;
  w_ = params.add(prefix + ".w", init_uniform({static_cast<std::size_t>(latent_dim), out},
                                              latent_dim, rng));
  b_ = params.add(prefix + ".b", init_uniform({1, out}, latent_dim, rng));
}

Tensor DeconvExpand::expand(const Tensor& z) const {
  return ad::add(ad::matmul(z, w_), b_);
}

Tensor DeconvExpand::step_input(const Tensor& expanded, int t) const {
  if (t < 0 || t >= steps_) throw DimensionError("deconv: step out of range");
  return ad::slice(expanded, 1, static_cast<std::size_t>(t) * step_dim_, step_dim_);
}

LSTMCell::LSTMCell(int input_dim, int hidden, int output_dim,
                   ad::ParamSet& params, Rng& rng, const std::string& prefix)
    : hidden_(hidden) {
  const auto in = static_cast<std::size_t>(input_dim);
  const auto h = static_cast<std::size_t>(hidden);
  wx_ = params.add(prefix + ".wx", init_uniform({in, 4 * h}, hidden, rng));
  wh_ = params.add(prefix + ".wh", init_uniform({h, 4 * h}, hidden, rng));
  b_ = params.add(prefix + ".b", init_uniform({1, 4 * h}, hidden, rng));
  wo_ = params.add(prefix + ".head.w",
                   init_uniform({h, static_cast<std::size_t>(output_dim)}, hidden, rng));
  bo_ = params.add(prefix + ".head.b",
                   init_uniform({1, static_cast<std::size_t>(output_dim)}, hidden, rng));
}

LSTMState LSTMCell::zero_state(std::size_t batch) const {
  const std::size_t h = hidden_;
  return {Tensor::zeros({batch, h}), Tensor::zeros({batch, h})};
}

std::pair<LSTMState, Tensor> LSTMCell::step(const Tensor& x,
                                            const LSTMState& state) const {
  const std::size_t h = hidden_;
  if (state.h.cols() != h || state.c.cols() != h) {
    throw DimensionError("lstm_step: state width " +
                         std::to_string(state.h.cols()) + " != hidden " +
                         std::to_string(h));
  }
  const Tensor pre =
      ad::add(ad::add(ad::matmul(x, wx_), ad::matmul(state.h, wh_)), b_);
  const Tensor i = ad::sigmoid(ad::slice(pre, 1, 0, h));
  const Tensor f = ad::sigmoid(ad::slice(pre, 1, h, h));
  const Tensor g = ad::tanh(ad::slice(pre, 1, 2 * h, h));
  const Tensor o = ad::sigmoid(ad::slice(pre, 1, 3 * h, h));
  LSTMState next;
  next.c = ad::add(ad::mul(f, state.c), ad::mul(i, g));
  next.h = ad::mul(o, ad::tanh(next.c));
  Tensor logits = ad::add(ad::matmul(next.h, wo_), bo_);
  return {std::move(next), std::move(logits)};
}

SequentialDecoder::SequentialDecoder(DecoderConfig config, ad::ParamSet& params,
                                     Rng& rng)
    : config_((config.validate(), config)),
      deconv_(config_.latent_dim, config_.step_count(), config_.step_dim,
              params, rng),
      cell_(config_.step_dim, config_.hidden, config_.pair_count(), params,
            rng) {}

std::vector<Tensor> SequentialDecoder::step_logits(const Tensor& z) const {
  if (z.cols() != static_cast<std::size_t>(config_.latent_dim)) {
    throw DimensionError("decoder: latent width " + std::to_string(z.cols()) +
                         " != " + std::to_string(config_.latent_dim));
  }
  const Tensor expanded = deconv_.expand(z);
  LSTMState state = cell_.zero_state(z.rows());
  std::vector<Tensor> out;
  for (int t = 0; t < config_.step_count(); ++t) {
    auto [next, logits] = cell_.step(deconv_.step_input(expanded, t), state);
    state = std::move(next);
    out.push_back(std::move(logits));
  }
  return out;
}

Tensor step_mask(int step, const std::vector<int>& n_nodes, int n_max) {
  const std::size_t pairs = static_cast<std::size_t>(n_max) * (n_max - 1) / 2;
  std::vector<double> mask;
  mask.reserve(n_nodes.size() * pairs);
  for (int n : n_nodes) {
    const auto row = live_pair_mask(live_nodes_at(step, n), n_max);
    mask.insert(mask.end(), row.begin(), row.end());
  }
  return Tensor::matrix(n_nodes.size(), pairs, std::move(mask));
}

Tensor masked_probs(const Tensor& logits, int step,
                    const std::vector<int>& n_nodes, int n_max) {
  return ad::mul(ad::sigmoid(logits), step_mask(step, n_nodes, n_max));
}

std::vector<Tensor> SequentialDecoder::decode_sequence(
    const Tensor& z, const std::vector<int>& n_nodes) const {
  if (n_nodes.size() != z.rows()) {
    throw DimensionError("decode_sequence: one node count per latent row");
  }
  const auto scatter = symmetric_scatter_index(config_.n_max);
  const auto logits = step_logits(z);
  std::vector<Tensor> out;
  for (std::size_t t = 0; t < logits.size(); ++t) {
    out.push_back(ad::gather_cols(
        masked_probs(logits[t], static_cast<int>(t), n_nodes, config_.n_max),
        scatter));
  }
  return out;
}

}  // namespace bavae::nn
