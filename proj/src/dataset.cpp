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

#include "bavae/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "bavae/error.hpp"

namespace bavae {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "bavae-dataset";
constexpr int kVersion = 1;

json spec_to_json(const DatasetSpec& s) {
  return json{{"count", s.count},
              {"n_min", s.n_min},
              {"n_max", s.n_max},
              {"m_min", s.m_min},
              {"m_max", s.m_max},
              {"m_cap_by_n", s.m_cap_by_n},
              {"alpha_mode", s.alpha_uniform ? "uniform" : "fixed"},
              {"alpha", s.alpha},
              {"alpha_lo", s.alpha_lo},
              {"alpha_hi", s.alpha_hi},
              {"alpha_floor", s.alpha_floor},
              {"pad", s.padding()},
              {"seed", s.seed}};
}

DatasetSpec spec_from_json(const json& j) {
  DatasetSpec s;
  s.count = j.at("count").get<int>();
  s.n_min = j.at("n_min").get<int>();
  s.n_max = j.at("n_max").get<int>();
  s.m_min = j.at("m_min").get<int>();
  s.m_max = j.at("m_max").get<int>();
  s.m_cap_by_n = j.at("m_cap_by_n").get<bool>();
  s.alpha_uniform = j.at("alpha_mode").get<std::string>() == "uniform";
  s.alpha = j.at("alpha").get<double>();
  s.alpha_lo = j.at("alpha_lo").get<double>();
  s.alpha_hi = j.at("alpha_hi").get<double>();
  s.alpha_floor = j.at("alpha_floor").get<double>();
  s.pad = j.at("pad").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

DatasetItem make_item(const DatasetSpec& spec, int index) {
  Rng rng(derive_seed(spec.seed, 2 * static_cast<std::uint64_t>(index)));
  DatasetItem item;
  item.id = index;
  item.seed = derive_seed(spec.seed, 2 * static_cast<std::uint64_t>(index) + 1);
  auto& p = item.params;
  p.n = static_cast<int>(rng.uniform_int(spec.n_min, spec.n_max));
  const int m_hi = spec.m_cap_by_n ? std::min(spec.m_max, p.n - 1) : spec.m_max;
  p.m = static_cast<int>(rng.uniform_int(spec.m_min, m_hi));
  p.alpha = spec.alpha_uniform ? rng.uniform(spec.alpha_lo, spec.alpha_hi)
                               : spec.alpha;
  p.alpha = std::max(p.alpha, spec.alpha_floor);
  item.graph = generate_ba(p, item.seed, spec.padding());
  return item;
}

}  // namespace

void DatasetSpec::validate() const {
  if (count < 0) throw_invalid("dataset spec: count must be >= 0");
  if (n_min < 2 || n_max < n_min) {
    throw_invalid("dataset spec: need 2 <= n_min <= n_max");
  }
  if (m_min < 1 || m_max < m_min) {
    throw_invalid("dataset spec: need 1 <= m_min <= m_max");
  }
  if (m_cap_by_n ? m_min >= n_min : m_max >= n_min) {
    throw_invalid("dataset spec: m range must stay below the smallest n");
  }
  if (alpha_uniform) {
    if (!(alpha_hi >= alpha_lo) || !(std::max(alpha_lo, alpha_floor) > 0.0)) {
      throw_invalid("dataset spec: alpha range must be non-empty and positive");
    }
  } else if (!(std::max(alpha, alpha_floor) > 0.0)) {
    throw_invalid("dataset spec: alpha must be positive");
  }
  if (pad != 0 && pad < n_max) {
    throw_invalid("dataset spec: padding smaller than n_max");
  }
}

Dataset generate_dataset(const DatasetSpec& spec, int jobs) {
  spec.validate();
  Dataset ds;
  ds.spec = spec;
  ds.items.resize(spec.count);
  jobs = std::clamp(jobs, 1, std::max(1, spec.count));
  if (jobs == 1) {
    for (int i = 0; i < spec.count; ++i) ds.items[i] = make_item(spec, i);
    return ds;
  }
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      for (int i = w; i < spec.count; i += jobs) ds.items[i] = make_item(spec, i);
    });
  }
  for (auto& t : workers) t.join();
  return ds;
}

void write_dataset(std::ostream& os, const Dataset& ds) {
  json header{{"format", kFormat},
              {"version", kVersion},
              {"rng", kRngName},
              {"seed_mix", kSeedMixName},
              {"n_max", ds.n_max()},
              {"spec", spec_to_json(ds.spec)}};
  os << header.dump() << '\n';
  for (const auto& item : ds.items) {
    json edges = json::array();
    for (auto [u, v] : item.graph.edges()) edges.push_back({u, v});
    json line{{"id", item.id},
              {"n", item.params.n},
              {"m", item.params.m},
              {"alpha", item.params.alpha},
              {"seed", item.seed},
              {"edges", std::move(edges)}};
    os << line.dump() << '\n';
  }
}

Dataset read_dataset(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) {
    throw Error(ErrorCode::kParse, "dataset: missing header line");
  }
  Dataset ds;
  try {
    const json header = json::parse(line);
    if (header.at("format").get<std::string>() != kFormat) {
      throw Error(ErrorCode::kParse, "dataset: unexpected format tag");
    }
    if (header.at("rng").get<std::string>() != kRngName) {
      throw Error(ErrorCode::kParse, "dataset: unsupported rng " +
                                         header.at("rng").get<std::string>());
    }
    ds.spec = spec_from_json(header.at("spec"));
    const int n_max = header.at("n_max").get<int>();
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      DatasetItem item;
      item.id = j.at("id").get<int>();
      item.seed = j.at("seed").get<std::uint64_t>();
      item.params.n = j.at("n").get<int>();
      item.params.m = j.at("m").get<int>();
      item.params.alpha = j.at("alpha").get<double>();
      item.params.validate();
      item.graph = Graph(item.params.n, n_max);
      for (const auto& e : j.at("edges")) {
        item.graph.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
      }
      ds.items.push_back(std::move(item));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("dataset: ") + e.what());
  }
  return ds;
}

void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  write_dataset(os, ds);
  if (!os) throw Error(ErrorCode::kIo, "write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot open " + path);
  return read_dataset(is);
}

}  // namespace bavae
