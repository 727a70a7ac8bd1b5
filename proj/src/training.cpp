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

#include "bavae/training.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "bavae/csv.hpp"
#include "bavae/error.hpp"
#include "bavae/metrics.hpp"

namespace bavae::train {

namespace {

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.uniform_int(0, static_cast<std::int64_t>(i) - 1)]);
  }
}

// n^2 x n matrix summing each row block of a flattened n x n matrix.
Tensor row_block_sum(int n) {
  std::vector<double> s(static_cast<std::size_t>(n) * n * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) s[(static_cast<std::size_t>(i) * n + j) * n + i] = 1.0;
  }
  return Tensor::matrix(static_cast<std::size_t>(n) * n, n, std::move(s));
}

std::array<double, 3> param_row(const BAParams& p) {
  return {static_cast<double>(p.n), static_cast<double>(p.m), p.alpha};
}

}  // namespace

Tensor reparameterize(const Tensor& mu, const Tensor& logvar, const Tensor& eps) {
  return ad::add(mu, ad::mul(ad::exp(ad::scale(logvar, 0.5)), eps));
}

Tensor kl_gauss(const Tensor& mu, const Tensor& logvar) {
  // exp(lv) + mu^2 - 1 - lv
  const Tensor inner = ad::sub(ad::add(ad::exp(logvar), ad::mul(mu, mu)),
                               ad::add_scalar(logvar, 1.0));
  return ad::scale(ad::sum(inner), 0.5);
}

std::vector<double> target_pairs(const Graph& g, int n_max) {
  std::vector<double> row(static_cast<std::size_t>(n_max) * (n_max - 1) / 2, 0.0);
  for (auto [u, v] : g.edges()) row[nn::pair_index(u, v, n_max)] = 1.0;
  return row;
}

ReconstructionLoss reconstruction_loss(const DecodedBatch& decoded,
                                       const Tensor& targets,
                                       const ConstraintWeights& w,
                                       int expected_steps) {
  const int N = static_cast<int>(decoded.step_logits.size());
  if (N != expected_steps) {
    throw DimensionError("reconstruction_loss: got " + std::to_string(N) +
                         " steps, config says " + std::to_string(expected_steps));
  }
  const int n = decoded.n_max;
  const auto B = static_cast<double>(decoded.n_nodes.size());
  const auto scatter = nn::symmetric_scatter_index(n);
  const auto tr = nn::transpose_index(n);
  const auto diag = nn::diagonal_index(n);
  const Tensor blocks = row_block_sum(n);

  std::vector<Tensor> edge_mass, node_mass;
  Tensor sym = Tensor::scalar(0.0), dia = Tensor::scalar(0.0), empty;
  for (int t = 0; t < N; ++t) {
    const Tensor& logits = decoded.step_logits[t];
    const Tensor mask = nn::step_mask(t, decoded.n_nodes, n);
    const Tensor probs = ad::mul(ad::sigmoid(logits), mask);
    const Tensor adj = ad::gather_cols(probs, scatter);

    const Tensor asym = ad::sub(adj, ad::gather_cols(adj, tr));
    sym = ad::add(sym, ad::sum(ad::mul(asym, asym)));
    const Tensor d = ad::gather_cols(adj, diag);
    dia = ad::add(dia, ad::sum(ad::mul(d, d)));
    if (t == 0) empty = ad::sum(ad::mul(adj, adj));

    edge_mass.push_back(ad::sum(probs, 1));
    // log(1 - p) = -softplus(logit); a node's chance of having no edge is
    // the exp of its row sum.
    const Tensor log_free =
        ad::gather_cols(ad::scale(ad::mul(ad::softplus(logits), mask), -1.0), scatter);
    const Tensor isolated = ad::exp(ad::matmul(log_free, blocks));
    node_mass.push_back(ad::sum(ad::add_scalar(ad::scale(isolated, -1.0), 1.0), 1));
  }
  Tensor grow_e = Tensor::scalar(0.0), grow_n = Tensor::scalar(0.0);
  for (int t = 0; t + 1 < N; ++t) {
    grow_e = ad::add(grow_e, ad::sum(ad::relu(ad::sub(edge_mass[t], edge_mass[t + 1]))));
    grow_n = ad::add(grow_n, ad::sum(ad::relu(ad::sub(node_mass[t], node_mass[t + 1]))));
  }

  const Tensor& final_logits = decoded.step_logits[N - 1];
  if (targets.shape() != final_logits.shape()) {
    throw DimensionError("reconstruction_loss: targets " +
                         ad::shape_str(targets.shape()) + " vs logits " +
                         ad::shape_str(final_logits.shape()));
  }
  const Tensor final_mask = nn::step_mask(N - 1, decoded.n_nodes, n);
  // -[y log p + (1 - y) log(1 - p)] = softplus(l) - y l
  const Tensor bce = ad::sum(ad::mul(
      ad::sub(ad::softplus(final_logits), ad::mul(targets, final_logits)), final_mask));

  Tensor total = bce;
  total = ad::add(total, ad::scale(sym, w.sym));
  total = ad::add(total, ad::scale(dia, w.diag));
  total = ad::add(total, ad::scale(grow_n, w.grow_nodes));
  total = ad::add(total, ad::scale(grow_e, w.grow_edges));
  total = ad::add(total, ad::scale(empty, w.empty_start));

  ReconstructionLoss out;
  out.total = ad::scale(total, 1.0 / B);
  out.bce = bce.item() / B;
  out.sym = sym.item() / B;
  out.diag = dia.item() / B;
  out.grow_nodes = grow_n.item() / B;
  out.grow_edges = grow_e.item() / B;
  out.empty_start = empty.item() / B;
  return out;
}

// ---- supervised -------------------------------------------------------------

SupervisedResult train_supervised_gnn(const Dataset& train, const Dataset& test,
                                      const SupervisedConfig& config) {
  if (train.n_max() != test.n_max()) {
    throw_invalid("train_supervised_gnn: train and test padding differ");
  }
  if (train.size() < 2 || test.size() < 1) {
    throw_invalid("train_supervised_gnn: datasets too small");
  }
  if (config.epochs < 0 || config.batch_size < 1 || !(config.adam.lr > 0.0)) {
    throw_invalid("train_supervised_gnn: need epochs >= 0, batch_size >= 1, lr > 0");
  }
  nn::GNNEncoderConfig enc_cfg = config.encoder;
  enc_cfg.n_max = train.n_max();
  enc_cfg.output_dim = 3;

  Rng init_rng(derive_seed(config.seed, 0));
  Rng order_rng(derive_seed(config.seed, 1));
  ad::ParamSet params;
  nn::GNNEncoder encoder(enc_cfg, params, init_rng);

  SupervisedResult result;
  auto& st = result.stats;
  for (int k = 0; k < 3; ++k) {
    std::vector<double> col;
    for (const auto& it : train.items) col.push_back(param_row(it.params)[k]);
    const double mu = std::accumulate(col.begin(), col.end(), 0.0) / col.size();
    double var = 0.0;
    for (double x : col) var += (x - mu) * (x - mu);
    var /= col.size();
    st.mean[k] = mu;
    st.std[k] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }

  std::vector<nn::GraphInput> inputs;
  std::vector<double> targets;
  for (const auto& it : train.items) {
    inputs.push_back(nn::prepare_graph(it.graph, enc_cfg.n_max));
    const auto row = param_row(it.params);
    for (int k = 0; k < 3; ++k) targets.push_back((row[k] - st.mean[k]) / st.std[k]);
  }

  ad::Adam opt(params, config.adam);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = std::max(1, config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, order_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      std::vector<Tensor> rows;
      std::vector<double> y;
      for (std::size_t i = start; i < end; ++i) {
        rows.push_back(encoder.encode(inputs[order[i]]));
        y.insert(y.end(), targets.begin() + 3 * order[i],
                 targets.begin() + 3 * order[i] + 3);
      }
      const Tensor pred = ad::concat(rows, 0);
      const Tensor diff = ad::sub(pred, Tensor::matrix(end - start, 3, std::move(y)));
      const Tensor loss = ad::mean(ad::mul(diff, diff));
      if (!std::isfinite(loss.item())) {
        throw DivergenceError("supervised training produced a non-finite loss at epoch " +
                                  std::to_string(epoch + 1),
                              epoch + 1);
      }
      params.zero_grad();
      loss.backward();
      opt.step();
      epoch_loss += loss.item() * static_cast<double>(end - start);
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
  }

  {
    ad::NoGradGuard no_grad;
    std::array<std::vector<double>, 3> pred, truth;
    for (const auto& it : test.items) {
      const Tensor out = encoder.encode(nn::prepare_graph(it.graph, enc_cfg.n_max));
      const auto row = param_row(it.params);
      std::array<double, 3> p{};
      for (int k = 0; k < 3; ++k) {
        p[k] = out.at(k) * st.std[k] + st.mean[k];
        pred[k].push_back(p[k]);
        truth[k].push_back(row[k]);
      }
      result.test_predictions.push_back(p);
    }
    for (int k = 0; k < 3; ++k) {
      result.test_mse[k] = metrics::mse(pred[k], truth[k]);
      try {
        result.test_pearson[k] = metrics::pearson(pred[k], truth[k]);
      } catch (const Error&) {
        result.test_pearson[k].reset();
      }
    }
  }

  nlohmann::json cfg{{"encoder", enc_cfg.to_json()},
                     {"epochs", config.epochs},
                     {"batch_size", config.batch_size},
                     {"lr", config.adam.lr},
                     {"target_mean", st.mean},
                     {"target_std", st.std}};
  result.checkpoint = ad::make_checkpoint("gnn_supervised", params, cfg,
                                          config.seed, &opt);
  return result;
}

ParameterPredictor::ParameterPredictor(const nlohmann::json& checkpoint) {
  try {
    if (checkpoint.at("kind").get<std::string>() != "gnn_supervised") {
      throw Error(ErrorCode::kParse, "checkpoint is not a supervised GNN");
    }
    const auto& cfg = checkpoint.at("config");
    Rng rng(0);
    encoder_ = std::make_unique<nn::GNNEncoder>(
        nn::GNNEncoderConfig::from_json(cfg.at("encoder")), params_, rng);
    stats_.mean = cfg.at("target_mean").get<std::array<double, 3>>();
    stats_.std = cfg.at("target_std").get<std::array<double, 3>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("checkpoint: ") + e.what());
  }
  ad::load_params(checkpoint, params_);
}

std::array<double, 3> ParameterPredictor::predict(const Graph& g) const {
  ad::NoGradGuard no_grad;
  const Tensor out = encoder_->encode(g);
  std::array<double, 3> p{};
  for (int k = 0; k < 3; ++k) p[k] = out.at(k) * stats_.std[k] + stats_.mean[k];
  return p;
}

// ---- VAE ----------------------------------------------------------------------

void VAEConfig::validate() const {
  if (!(beta >= 0.0)) throw_invalid("vae config: beta must be >= 0");
  if (epochs < 0 || batch_size < 1 || latent_dim < 1) {
    throw_invalid("vae config: need epochs >= 0, batch_size >= 1, latent_dim >= 1");
  }
  if (!(adam.lr > 0.0)) throw_invalid("vae config: lr must be > 0");
  const auto& w = weights;
  if (w.sym < 0 || w.diag < 0 || w.grow_nodes < 0 || w.grow_edges < 0 ||
      w.empty_start < 0) {
    throw_invalid("vae config: constraint weights must be >= 0");
  }
}

nlohmann::json VAEConfig::to_json() const {
  return {{"beta", beta},
          {"epochs", epochs},
          {"batch_size", batch_size},
          {"latent_dim", latent_dim},
          {"lambda_sym", weights.sym},
          {"lambda_diag", weights.diag},
          {"lambda_grow_nodes", weights.grow_nodes},
          {"lambda_grow_edges", weights.grow_edges},
          {"lambda_empty_start", weights.empty_start},
          {"lr", adam.lr},
          {"beta1", adam.beta1},
          {"beta2", adam.beta2},
          {"eps", adam.eps},
          {"seed", seed},
          {"conv_layers", conv_layers},
          {"hidden_width", hidden_width},
          {"head_widths", head_widths},
          {"pooling", pooling == nn::Pooling::kSum ? "sum" : "mean"},
          {"step_dim", step_dim},
          {"lstm_hidden", lstm_hidden}};
}

VAEConfig VAEConfig::from_json(const nlohmann::json& j) {
  VAEConfig c;
  c.beta = j.at("beta").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.latent_dim = j.at("latent_dim").get<int>();
  c.weights.sym = j.at("lambda_sym").get<double>();
  c.weights.diag = j.at("lambda_diag").get<double>();
  c.weights.grow_nodes = j.at("lambda_grow_nodes").get<double>();
  c.weights.grow_edges = j.at("lambda_grow_edges").get<double>();
  c.weights.empty_start = j.at("lambda_empty_start").get<double>();
  c.adam.lr = j.at("lr").get<double>();
  c.adam.beta1 = j.at("beta1").get<double>();
  c.adam.beta2 = j.at("beta2").get<double>();
  c.adam.eps = j.at("eps").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.conv_layers = j.at("conv_layers").get<int>();
  c.hidden_width = j.at("hidden_width").get<int>();
  c.head_widths = j.at("head_widths").get<std::vector<int>>();
  c.pooling = j.at("pooling").get<std::string>() == "mean" ? nn::Pooling::kMean
                                                           : nn::Pooling::kSum;
  c.step_dim = j.at("step_dim").get<int>();
  c.lstm_hidden = j.at("lstm_hidden").get<int>();
  return c;
}

void write_report_csv(std::ostream& os, const TrainReport& report) {
  os << "epoch,total,bce,kl,sym,diag,grow_nodes,grow_edges,empty_start\n";
  for (std::size_t e = 0; e < report.epochs.size(); ++e) {
    const auto& s = report.epochs[e];
    os << e + 1 << ',' << csv::num(s.total) << ',' << csv::num(s.bce) << ','
       << csv::num(s.kl) << ',' << csv::num(s.sym) << ',' << csv::num(s.diag)
       << ',' << csv::num(s.grow_nodes) << ',' << csv::num(s.grow_edges) << ','
       << csv::num(s.empty_start) << '\n';
  }
}

VAEModel::VAEModel(const VAEConfig& config, int n_max)
    : config_(config), n_max_(n_max) {
  config_.validate();
  Rng rng(derive_seed(config_.seed, 0));
  nn::GNNEncoderConfig enc;
  enc.n_max = n_max;
  enc.conv_layers = config_.conv_layers;
  enc.hidden_width = config_.hidden_width;
  enc.head_widths = config_.head_widths;
  enc.pooling = config_.pooling;
  enc.output_dim = 2 * config_.latent_dim;
  encoder_ = std::make_unique<nn::GNNEncoder>(enc, params_, rng);
  nn::DecoderConfig dec;
  dec.n_max = n_max;
  dec.latent_dim = config_.latent_dim;
  dec.step_dim = config_.step_dim;
  dec.hidden = config_.lstm_hidden;
  decoder_ = std::make_unique<nn::SequentialDecoder>(dec, params_, rng);
}

VAEModel::Output VAEModel::forward(const std::vector<const nn::GraphInput*>& inputs,
                                   const std::vector<int>& n_nodes,
                                   const Tensor& eps) const {
  std::vector<Tensor> rows;
  for (const auto* in : inputs) rows.push_back(encoder_->encode(*in));
  const Tensor enc = ad::concat(rows, 0);
  const std::size_t J = config_.latent_dim;
  Output out;
  out.mu = ad::slice(enc, 1, 0, J);
  out.logvar = ad::slice(enc, 1, J, J);
  out.z = reparameterize(out.mu, out.logvar, eps);
  out.decoded.step_logits = decoder_->step_logits(out.z);
  out.decoded.n_nodes = n_nodes;
  out.decoded.n_max = n_max_;
  return out;
}

std::vector<std::vector<double>> VAEModel::posterior_means(const Dataset& ds) const {
  ad::NoGradGuard no_grad;
  std::vector<std::vector<double>> out;
  for (const auto& it : ds.items) {
    const Tensor enc = encoder_->encode(nn::prepare_graph(it.graph, n_max_));
    out.emplace_back(enc.data().begin(), enc.data().begin() + config_.latent_dim);
  }
  return out;
}

VAELoss vae_loss(const VAEModel& model, const VAEModel::Output& out,
                 const Tensor& targets) {
  VAELoss l;
  l.recon = reconstruction_loss(out.decoded, targets, model.config().weights,
                                model.decoder().config().step_count());
  const double B = static_cast<double>(out.decoded.n_nodes.size());
  const Tensor kl = ad::scale(kl_gauss(out.mu, out.logvar), 1.0 / B);
  l.kl = kl.item();
  l.total = ad::add(l.recon.total, ad::scale(kl, model.config().beta));
  return l;
}

VAEResult train_vae(const Dataset& data, const VAEConfig& config) {
  if (data.size() < 1) throw_invalid("train_vae: empty dataset");
  const auto started = std::chrono::steady_clock::now();
  const int n_max = data.n_max();
  VAEModel model(config, n_max);
  Rng rng(derive_seed(config.seed, 1));

  std::vector<nn::GraphInput> inputs;
  std::vector<std::vector<double>> targets;
  std::vector<int> sizes;
  for (const auto& it : data.items) {
    inputs.push_back(nn::prepare_graph(it.graph, n_max));
    targets.push_back(target_pairs(it.graph, n_max));
    sizes.push_back(it.graph.n_nodes());
  }

  ad::Adam opt(model.params(), config.adam);
  VAEResult result;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = config.batch_size;
  const std::size_t J = config.latent_dim;
  const std::size_t pairs = static_cast<std::size_t>(n_max) * (n_max - 1) / 2;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, rng);
    EpochStats s;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      const std::size_t B = end - start;
      std::vector<const nn::GraphInput*> batch;
      std::vector<int> n_nodes;
      std::vector<double> y;
      y.reserve(B * pairs);
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(&inputs[order[i]]);
        n_nodes.push_back(sizes[order[i]]);
        y.insert(y.end(), targets[order[i]].begin(), targets[order[i]].end());
      }
      std::vector<double> eps(B * J);
      for (double& e : eps) e = rng.normal();

      const auto out = model.forward(batch, n_nodes, Tensor::matrix(B, J, std::move(eps)));
      const auto loss = vae_loss(model, out, Tensor::matrix(B, pairs, std::move(y)));
      const double total = loss.total.item();
      if (!std::isfinite(total) || total > 1e6) {
        throw DivergenceError("VAE training diverged at epoch " +
                                  std::to_string(epoch + 1) + " (loss " +
                                  std::to_string(total) + ")",
                              epoch + 1);
      }
      model.params().zero_grad();
      loss.total.backward();
      opt.step();

      const double w = static_cast<double>(B);
      s.total += w * total;
      s.bce += w * loss.recon.bce;
      s.kl += w * loss.kl;
      s.sym += w * loss.recon.sym;
      s.diag += w * loss.recon.diag;
      s.grow_nodes += w * loss.recon.grow_nodes;
      s.grow_edges += w * loss.recon.grow_edges;
      s.empty_start += w * loss.recon.empty_start;
    }
    const double n = static_cast<double>(order.size());
    for (double* f : {&s.total, &s.bce, &s.kl, &s.sym, &s.diag, &s.grow_nodes,
                      &s.grow_edges, &s.empty_start}) {
      *f /= n;
    }
    result.report.epochs.push_back(s);
  }

  result.latents = model.posterior_means(data);
  result.checkpoint = ad::make_checkpoint(
      "vae", model.params(),
      {{"vae", config.to_json()}, {"n_max", n_max}}, config.seed, &opt);
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace bavae::train
