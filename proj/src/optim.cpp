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

#include "bavae/optim.hpp"

#include <cmath>

#include "bavae/error.hpp"

namespace bavae::ad {

void sgd_step(std::span<double> params, std::span<const double> grads,
              double lr) {
  if (params.size() != grads.size()) throw DimensionError("sgd_step: size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

void adam_step(std::span<double> params, std::span<const double> grads,
               std::span<double> m, std::span<double> v, int t,
               const AdamConfig& c) {
  if (params.size() != grads.size() || m.size() != params.size() ||
      v.size() != params.size()) {
    throw DimensionError("adam_step: size mismatch");
  }
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grads[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * grads[i] * grads[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    params[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
  }
}

Tensor ParamSet::add(const std::string& name, Tensor t) {
  for (const auto& [n, _] : items_) {
    if (n == name) throw_invalid("parameter registered twice: " + name);
  }
  t.set_requires_grad(true);
  items_.emplace_back(name, t);
  return t;
}

Tensor ParamSet::get(const std::string& name) const {
  for (const auto& [n, t] : items_) {
    if (n == name) return t;
  }
  throw_invalid("unknown parameter: " + name);
}

std::size_t ParamSet::scalar_count() const {
  std::size_t total = 0;
  for (const auto& [_, t] : items_) total += t.size();
  return total;
}

void ParamSet::zero_grad() {
  for (auto& [_, t] : items_) t.zero_grad();
}

Adam::Adam(const ParamSet& params, AdamConfig config)
    : params_(params), config_(config) {
  for (const auto& [_, t] : params_.items()) {
    m_.emplace_back(t.size(), 0.0);
    v_.emplace_back(t.size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const auto& items = params_.items();
  for (std::size_t k = 0; k < items.size(); ++k) {
    Tensor p = items[k].second;
    if (p.grad().size() != p.size()) continue;
    adam_step(p.mutable_data(), p.grad(), m_[k], v_[k], t_, config_);
  }
}

nlohmann::json Adam::state() const {
  nlohmann::json m = nlohmann::json::object(), v = nlohmann::json::object();
  const auto& items = params_.items();
  for (std::size_t k = 0; k < items.size(); ++k) {
    m[items[k].first] = m_[k];
    v[items[k].first] = v_[k];
  }
  return {{"name", "adam"},
          {"lr", config_.lr},
          {"beta1", config_.beta1},
          {"beta2", config_.beta2},
          {"eps", config_.eps},
          {"t", t_},
          {"m", std::move(m)},
          {"v", std::move(v)}};
}

void Adam::load_state(const nlohmann::json& j) {
  t_ = j.at("t").get<int>();
  const auto& items = params_.items();
  for (std::size_t k = 0; k < items.size(); ++k) {
    m_[k] = j.at("m").at(items[k].first).get<std::vector<double>>();
    v_[k] = j.at("v").at(items[k].first).get<std::vector<double>>();
  }
}

nlohmann::json make_checkpoint(const std::string& kind, const ParamSet& params,
                               const nlohmann::json& config,
                               std::uint64_t seed, const Adam* optimizer) {
  nlohmann::json p = nlohmann::json::object();
  for (const auto& [name, t] : params.items()) {
    p[name] = {{"shape", t.shape()},
               {"data", std::vector<double>(t.data().begin(), t.data().end())}};
  }
  nlohmann::json out{{"format", "bavae-checkpoint"},
                     {"version", 1},
                     {"kind", kind},
                     {"seed", seed},
                     {"config", config},
                     {"params", std::move(p)}};
  out["optimizer"] = optimizer ? optimizer->state() : nlohmann::json(nullptr);
  return out;
}

void load_params(const nlohmann::json& checkpoint, ParamSet& params) {
  try {
    const auto& p = checkpoint.at("params");
    if (p.size() != params.items().size()) {
      throw Error(ErrorCode::kParse, "checkpoint: parameter count mismatch");
    }
    for (auto& [name, t] : params.items()) {
      const auto& entry = p.at(name);
      const auto shape = entry.at("shape").get<Shape>();
      const auto data = entry.at("data").get<std::vector<double>>();
      if (shape != t.shape() || data.size() != t.size()) {
        throw DimensionError("checkpoint: shape mismatch for " + name +
                             ": stored " + shape_str(shape) + ", model " +
                             shape_str(t.shape()));
      }
      Tensor target = t;
      std::copy(data.begin(), data.end(), target.mutable_data().begin());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("checkpoint: ") + e.what());
  }
}

}  // namespace bavae::ad
