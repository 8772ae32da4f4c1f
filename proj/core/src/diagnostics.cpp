// Copyright 2026 The scoretrend Authors
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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scoretrend/error.hpp"
#include "scoretrend/inference.hpp"

namespace scoretrend {
namespace {

// Halves every chain (dropping the middle draw of odd lengths).
std::vector<std::vector<double>> split_chains(
    const std::vector<std::vector<double>>& chains) {
  if (chains.empty()) {
    throw Error(ErrorCode::kInsufficientData, "no chains");
  }
  std::size_t n = chains.front().size();
  for (const auto& c : chains) n = std::min(n, c.size());
  const std::size_t half = n / 2;
  if (half < 2) {
    throw Error(ErrorCode::kInsufficientData,
                "need at least 4 draws per chain");
  }
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.begin() + static_cast<std::ptrdiff_t>(n - half),
                     c.begin() + static_cast<std::ptrdiff_t>(n));
  }
  return out;
}

struct ChainMoments {
  std::vector<double> means;
  std::vector<double> vars;  // n - 1 denominator
  double within = 0.0;
  double var_plus = 0.0;
  std::size_t n = 0;
};

ChainMoments moments(const std::vector<std::vector<double>>& chains) {
  ChainMoments m;
  m.n = chains.front().size();
  const double n = static_cast<double>(m.n);
  for (const auto& c : chains) {
    const double mu = std::accumulate(c.begin(), c.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : c) ss += (x - mu) * (x - mu);
    m.means.push_back(mu);
    m.vars.push_back(ss / (n - 1.0));
  }
  const double k = static_cast<double>(chains.size());
  m.within = std::accumulate(m.vars.begin(), m.vars.end(), 0.0) / k;
  const double grand = std::accumulate(m.means.begin(), m.means.end(), 0.0) / k;
  double b = 0.0;
  for (double mu : m.means) b += (mu - grand) * (mu - grand);
  b *= n / (k - 1.0);
  m.var_plus = (n - 1.0) / n * m.within + b / n;
  return m;
}

// Biased (1/n) autocovariance at lag t.
double autocovariance(const std::vector<double>& x, double mean,
                      std::size_t lag) {
  double acc = 0.0;
  for (std::size_t i = 0; i + lag < x.size(); ++i) {
    acc += (x[i] - mean) * (x[i + lag] - mean);
  }
  return acc / static_cast<double>(x.size());
}

}  // namespace

double split_rhat(const std::vector<std::vector<double>>& chains) {
  const auto m = moments(split_chains(chains));
  if (!(m.within > 0.0)) return 1.0;
  return std::sqrt(m.var_plus / m.within);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  const auto split = split_chains(chains);
  const auto m = moments(split);
  const double total =
      static_cast<double>(split.size()) * static_cast<double>(m.n);
  if (!(m.var_plus > 0.0)) return total;

  auto rho = [&](std::size_t lag) {
    double mean_acov = 0.0;
    for (std::size_t c = 0; c < split.size(); ++c) {
      mean_acov += autocovariance(split[c], m.means[c], lag);
    }
    mean_acov /= static_cast<double>(split.size());
    return 1.0 - (m.within - mean_acov) / m.var_plus;
  };

  // Geyer's initial positive sequence on paired sums, made monotone.
  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t + 1 < m.n; t += 2) {
    double pair = rho(t) + rho(t + 1);
    if (pair < 0.0) break;
    pair = std::min(pair, prev_pair);
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  tau = std::max(tau, 1.0 / std::log10(total));
  return total / tau;
}

}  // namespace scoretrend
