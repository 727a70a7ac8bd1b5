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

#include "bavae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "bavae/csv.hpp"
#include "bavae/error.hpp"

namespace bavae::metrics {

std::vector<int> discretize(std::span<const double> values, int bins) {
  if (bins < 2) throw_invalid("discretize: bins must be >= 2");
  std::vector<int> labels(values.size(), 0);
  if (values.empty()) return labels;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw_invalid("discretize: non-finite value");
  }
  if (hi == lo) return labels;
  const double width = (hi - lo) / bins;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto b = static_cast<int>(std::floor((values[i] - lo) / width));
    labels[i] = std::clamp(b, 0, bins - 1);
  }
  return labels;
}

std::vector<int> discretize_distinct(std::span<const double> values) {
  std::vector<double> distinct(values.begin(), values.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<int> labels(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    labels[i] = static_cast<int>(
        std::lower_bound(distinct.begin(), distinct.end(), values[i]) -
        distinct.begin());
  }
  return labels;
}

bool is_integer_valued(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v) && v == std::round(v); });
}

std::vector<int> discretize_column(std::span<const double> values, int bins) {
  return is_integer_valued(values) ? discretize_distinct(values)
                                   : discretize(values, bins);
}

namespace {

std::map<int, double> counts(std::span<const int> x) {
  std::map<int, double> c;
  for (int v : x) c[v] += 1.0;
  return c;
}

}  // namespace

double entropy(std::span<const int> x) {
  if (x.empty()) throw_invalid("entropy: empty input");
  const double n = static_cast<double>(x.size());
  double h = 0.0;
  for (const auto& [_, c] : counts(x)) {
    const double p = c / n;
    h -= p * std::log(p);
  }
  return std::max(0.0, h);
}

double mutual_information(std::span<const int> x, std::span<const int> y) {
  if (x.size() != y.size() || x.empty()) {
    throw_invalid("mutual_information: need equal non-empty inputs");
  }
  const double n = static_cast<double>(x.size());
  const auto cx = counts(x);
  const auto cy = counts(y);
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < x.size(); ++i) joint[{x[i], y[i]}] += 1.0;
  double mi = 0.0;
  for (const auto& [key, c] : joint) {
    // p(x,y) log(p(x,y) / (p(x) p(y))) with counts.
    mi += c / n * std::log(c * n / (cx.at(key.first) * cy.at(key.second)));
  }
  return std::max(0.0, mi);
}

std::size_t FactorTable::rows() const {
  if (!factors.empty()) return factors[0].size();
  return latents.empty() ? 0 : latents[0].size();
}

void FactorTable::validate() const {
  if (factors.size() != factor_names.size() ||
      latents.size() != latent_names.size()) {
    throw_invalid("factor table: names and columns disagree");
  }
  if (factors.empty()) throw_invalid("factor table: no factors");
  const auto n = rows();
  for (const auto& c : factors) {
    if (c.size() != n) throw_invalid("factor table: ragged factor columns");
  }
  for (const auto& c : latents) {
    if (c.size() != n) throw_invalid("factor table: ragged latent columns");
  }
}

MIGReport mig(const FactorTable& table, int bins) {
  table.validate();
  const std::size_t J = table.latents.size();
  const std::size_t K = table.factors.size();
  if (J < 2) throw_invalid("mig: need at least two latents");

  MIGReport r;
  r.factor_names = table.factor_names;
  r.latent_names = table.latent_names;
  std::vector<std::vector<int>> z(J), v(K);
  for (std::size_t j = 0; j < J; ++j) z[j] = discretize(table.latents[j], bins);
  for (std::size_t k = 0; k < K; ++k) v[k] = discretize_column(table.factors[k], bins);

  r.mi.assign(J, std::vector<double>(K, 0.0));
  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t k = 0; k < K; ++k) r.mi[j][k] = mutual_information(z[j], v[k]);
  }

  double total = 0.0;
  int used = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const double h = entropy(v[k]);
    r.entropy.push_back(h);
    int best = 0;
    for (std::size_t j = 1; j < J; ++j) {
      if (r.mi[j][k] > r.mi[best][k]) best = static_cast<int>(j);
    }
    double second = -1.0;
    for (std::size_t j = 0; j < J; ++j) {
      if (static_cast<int>(j) != best) second = std::max(second, r.mi[j][k]);
    }
    r.best_latent.push_back(best);
    if (h <= 0.0) {
      r.excluded.push_back(true);
      r.gap.push_back(0.0);
      r.warnings.push_back("factor " + table.factor_names[k] +
                           " has zero entropy; excluded from MIG");
      continue;
    }
    r.excluded.push_back(false);
    const double gap = (r.mi[best][k] - second) / h;
    r.gap.push_back(gap);
    total += gap;
    ++used;
  }
  if (used == 0) throw_invalid("mig: every factor is degenerate");
  r.mig = total / used;
  return r;
}

FactorTable reparameterize_factor_m_over_n(FactorTable table) {
  const auto find = [&](const std::string& name) {
    auto it = std::find(table.factor_names.begin(), table.factor_names.end(), name);
    if (it == table.factor_names.end()) {
      throw_invalid("m/n re-parameterisation: missing factor " + name);
    }
    return static_cast<std::size_t>(it - table.factor_names.begin());
  };
  const auto& n = table.factors[find("n")];
  const auto& m = table.factors[find("m")];
  std::vector<double> ratio(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) ratio[i] = m[i] / n[i];
  table.factor_names.push_back("m_over_n");
  table.factors.push_back(std::move(ratio));
  return table;
}

FactorTable replace_factor(const FactorTable& table, const std::string& from,
                           const std::string& to) {
  FactorTable out = table;
  auto src = std::find(out.factor_names.begin(), out.factor_names.end(), to);
  auto dst = std::find(out.factor_names.begin(), out.factor_names.end(), from);
  if (src == out.factor_names.end() || dst == out.factor_names.end()) {
    throw_invalid("replace_factor: unknown factor");
  }
  const auto si = static_cast<std::size_t>(src - out.factor_names.begin());
  const auto di = static_cast<std::size_t>(dst - out.factor_names.begin());
  out.factors[di] = out.factors[si];
  out.factor_names[di] = to;
  out.factors.erase(out.factors.begin() + static_cast<std::ptrdiff_t>(si));
  out.factor_names.erase(out.factor_names.begin() + static_cast<std::ptrdiff_t>(si));
  return out;
}

double mse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size() || pred.empty()) {
    throw_invalid("mse: need equal non-empty inputs");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  }
  return s / static_cast<double>(pred.size());
}

double pearson(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size() || pred.size() < 2) {
    throw_invalid("pearson: need equal inputs of length >= 2");
  }
  const double n = static_cast<double>(pred.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    mx += pred[i];
    my += truth[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dx = pred[i] - mx, dy = truth[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) throw_invalid("pearson: zero variance input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

void write_mig_csv(std::ostream& os, const MIGReport& r) {
  os << "factor,entropy,excluded,best_latent,normalized_gap";
  for (const auto& name : r.latent_names) os << ",mi_" << name;
  os << '\n';
  for (std::size_t k = 0; k < r.factor_names.size(); ++k) {
    os << r.factor_names[k] << ',' << csv::num(r.entropy[k]) << ','
       << (r.excluded[k] ? 1 : 0) << ',' << r.best_latent[k] << ','
       << csv::num(r.gap[k]);
    for (std::size_t j = 0; j < r.latent_names.size(); ++j) {
      os << ',' << csv::num(r.mi[j][k]);
    }
    os << '\n';
  }
  os << "MIG,,,," << csv::num(r.mig);
  for (std::size_t j = 0; j < r.latent_names.size(); ++j) os << ',';
  os << '\n';
}

FactorTable read_factor_table(const std::string& latents_path,
                              const std::string& factors_path) {
  const auto lat = csv::read_table(latents_path);
  const auto fac = csv::read_table(factors_path);
  const int lid = lat.column_index("id");
  const int fid = fac.column_index("id");
  if (lid < 0 || fid < 0) {
    throw Error(ErrorCode::kParse, "factor table: both files need an id column");
  }
  std::map<long long, std::size_t> fac_row;
  for (std::size_t i = 0; i < fac.rows(); ++i) {
    fac_row[std::llround(fac.columns[fid][i])] = i;
  }
  FactorTable t;
  for (std::size_t c = 0; c < lat.header.size(); ++c) {
    if (static_cast<int>(c) == lid) continue;
    t.latent_names.push_back(lat.header[c]);
    t.latents.emplace_back();
  }
  for (std::size_t c = 0; c < fac.header.size(); ++c) {
    if (static_cast<int>(c) == fid) continue;
    t.factor_names.push_back(fac.header[c]);
    t.factors.emplace_back();
  }
  for (std::size_t i = 0; i < lat.rows(); ++i) {
    const auto it = fac_row.find(std::llround(lat.columns[lid][i]));
    if (it == fac_row.end()) {
      throw Error(ErrorCode::kParse, "factor table: latent id without factors");
    }
    std::size_t out = 0;
    for (std::size_t c = 0; c < lat.header.size(); ++c) {
      if (static_cast<int>(c) != lid) t.latents[out++].push_back(lat.columns[c][i]);
    }
    out = 0;
    for (std::size_t c = 0; c < fac.header.size(); ++c) {
      if (static_cast<int>(c) != fid) {
        t.factors[out++].push_back(fac.columns[c][it->second]);
      }
    }
  }
  t.validate();
  return t;
}

}  // namespace bavae::metrics
