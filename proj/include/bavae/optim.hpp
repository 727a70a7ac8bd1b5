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

#ifndef BAVAE_OPTIM_HPP_
#define BAVAE_OPTIM_HPP_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bavae/tensor.hpp"

namespace bavae::ad {

void sgd_step(std::span<double> params, std::span<const double> grads,
              double lr);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update; `t` is the 1-based step count.
void adam_step(std::span<double> params, std::span<const double> grads,
               std::span<double> m, std::span<double> v, int t,
               const AdamConfig& config);

// Named trainable tensors in registration order.
class ParamSet {
 public:
  Tensor add(const std::string& name, Tensor t);
  Tensor get(const std::string& name) const;
  const std::vector<std::pair<std::string, Tensor>>& items() const {
    return items_;
  }
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
};

class Adam {
 public:
  Adam(const ParamSet& params, AdamConfig config);
  // Parameters with no gradient this step are left untouched.
  void step();
  int steps() const { return t_; }

  nlohmann::json state() const;
  void load_state(const nlohmann::json& j);

 private:
  const ParamSet& params_;
  AdamConfig config_;
  int t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// {"format", "version", "kind", "seed", "config", "params": {name: {shape,
// data}}, "optimizer"}. Doubles are written with round-trip precision.
nlohmann::json make_checkpoint(const std::string& kind, const ParamSet& params,
                               const nlohmann::json& config,
                               std::uint64_t seed, const Adam* optimizer);
// Copies values into `params`; names and shapes must match exactly.
void load_params(const nlohmann::json& checkpoint, ParamSet& params);

}  // namespace bavae::ad

#endif  // BAVAE_OPTIM_HPP_
