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

#ifndef BAVAE_DATASET_HPP_
#define BAVAE_DATASET_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bavae/graph.hpp"

namespace bavae {

struct DatasetSpec {
  int count = 100;
  int n_min = 50;
  int n_max = 50;
  int m_min = 1;
  int m_max = 49;
  // When set, each graph draws m from [m_min, min(m_max, n - 1)].
  bool m_cap_by_n = false;
  bool alpha_uniform = false;
  double alpha = 1.0;  // used when !alpha_uniform
  double alpha_lo = 1.0 / 3.0;
  double alpha_hi = 3.0;
  // Drawn alphas below this are raised to it (alpha must stay positive).
  double alpha_floor = 0.0;
  // Adjacency padding; 0 means n_max.
  int pad = 0;
  std::uint64_t seed = 0;

  int padding() const { return pad == 0 ? n_max : pad; }
  void validate() const;
};

struct DatasetItem {
  int id = 0;
  std::uint64_t seed = 0;
  BAParams params;
  Graph graph;
};

struct Dataset {
  DatasetSpec spec;
  std::vector<DatasetItem> items;

  std::size_t size() const { return items.size(); }
  int n_max() const { return spec.padding(); }
};

// Item i draws its parameters from Rng(derive_seed(seed, 2i)) and generates
// its graph with seed derive_seed(seed, 2i + 1), so items are independent
// of each other and of the worker count.
Dataset generate_dataset(const DatasetSpec& spec, int jobs = 1);

// JSON-lines: a header object, then one graph per line.
void write_dataset(std::ostream& os, const Dataset& ds);
Dataset read_dataset(std::istream& is);
void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

}  // namespace bavae

#endif  // BAVAE_DATASET_HPP_
