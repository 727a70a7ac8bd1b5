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

#ifndef BAVAE_METRICS_HPP_
#define BAVAE_METRICS_HPP_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace bavae::metrics {

// Equal-width bins over [min, max]; the top edge belongs to the last bin and
// a constant column maps to label 0.
std::vector<int> discretize(std::span<const double> values, int bins);
// One label per distinct value, in increasing value order.
std::vector<int> discretize_distinct(std::span<const double> values);
bool is_integer_valued(std::span<const double> values);
// Integer-valued columns get one bin per distinct value, others `bins`
// equal-width bins.
std::vector<int> discretize_column(std::span<const double> values, int bins);

// Plug-in estimates from empirical histograms, in nats.
double entropy(std::span<const int> x);
double mutual_information(std::span<const int> x, std::span<const int> y);

struct FactorTable {
  std::vector<std::string> factor_names;
  std::vector<std::vector<double>> factors;  // one column per factor
  std::vector<std::string> latent_names;
  std::vector<std::vector<double>> latents;  // one column per latent

  std::size_t rows() const;
  void validate() const;
};

struct MIGReport {
  std::vector<std::string> factor_names;
  std::vector<std::string> latent_names;
  std::vector<std::vector<double>> mi;  // mi[j][k] = I(z_j; v_k)
  std::vector<double> entropy;          // H(v_k)
  std::vector<int> best_latent;         // argmax_j, lowest index on ties
  std::vector<double> gap;              // normalised by H(v_k)
  std::vector<bool> excluded;           // H(v_k) == 0
  std::vector<std::string> warnings;
  double mig = 0.0;
};

// Mean over non-degenerate factors of
//   (I(z_best; v_k) - max_{j != best} I(z_j; v_k)) / H(v_k).
// Needs at least two latents.
MIGReport mig(const FactorTable& table, int bins = 20);

// Adds an "m_over_n" factor column; existing columns are kept.
FactorTable reparameterize_factor_m_over_n(FactorTable table);
// Copy with factor `from` replaced by `to` in place (same position).
FactorTable replace_factor(const FactorTable& table, const std::string& from,
                           const std::string& to);

double mse(std::span<const double> pred, std::span<const double> truth);
// Throws on zero variance in either input.
double pearson(std::span<const double> pred, std::span<const double> truth);

// factor,entropy,excluded,best_latent,normalized_gap,mi_<latent>...; the
// last row carries the scalar in the normalized_gap column with factor MIG.
void write_mig_csv(std::ostream& os, const MIGReport& report);

// Latents CSV: id,<latent columns>. Factors CSV: id,<factor columns>. Rows
// are matched by id.
FactorTable read_factor_table(const std::string& latents_path,
                              const std::string& factors_path);

}  // namespace bavae::metrics

#endif  // BAVAE_METRICS_HPP_
