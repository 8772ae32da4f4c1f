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

#include "scoretrend/indices.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "scoretrend/error.hpp"

namespace scoretrend {
namespace {

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> equidistant_grid(double end, int points) {
  if (points < 2 || !(end > 0.0)) {
    throw Error(ErrorCode::kInvalidInput,
                "grid needs at least 2 points and a positive end");
  }
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    g[static_cast<std::size_t>(i)] = end * i / (points - 1);
  }
  return g;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kInvalidInput, "trapezoid: size mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  }
  return acc;
}

double tdi_at(double mu1, double var1) {
  if (var1 < 0.0 || std::isnan(var1)) {
    throw Error(ErrorCode::kInvalidInput, "TDI: negative variance");
  }
  if (var1 == 0.0) {
    return mu1 > 0.0 ? 1.0 : (mu1 < 0.0 ? 0.0 : 0.5);
  }
  // Evaluated on the upper half so that negating mu1 gives 1 - TDI exactly.
  const double upper =
      0.5 + 0.5 * std::erf(std::abs(mu1) / (std::sqrt(2.0) * std::sqrt(var1)));
  return mu1 < 0.0 ? 1.0 - upper : upper;
}

CrossingIntensityTerms crossing_terms(double var1, double var2, double cov12,
                                      double mu1, double mu2) {
  if (!(var1 > 0.0) || !(var2 > 0.0)) {
    throw Error(ErrorCode::kInvalidInput,
                "crossing terms need strictly positive variances");
  }
  const double sd1 = std::sqrt(var1);
  const double sd2 = std::sqrt(var2);
  CrossingIntensityTerms t;
  t.omega = std::clamp(cov12 / (sd1 * sd2), -1.0, 1.0);
  const double one_minus = 1.0 - t.omega * t.omega;
  if (one_minus <= 1e-12) {
    throw Error(ErrorCode::kDegenerateCorrelation,
                "d' and d'' are perfectly correlated");
  }
  const double root = std::sqrt(one_minus);
  t.lambda = sd2 / sd1 * root;
  t.zeta = (mu1 * sd2 * t.omega / sd1 - mu2) / (sd2 * root);
  return t;
}

double deti_at(double mu1, double mu2, double var1, double var2,
               double cov12) {
  const auto t = crossing_terms(var1, var2, cov12, mu1, mu2);
  const double bracket =
      2.0 * normal_pdf(t.zeta) + t.zeta * std::erf(t.zeta / std::sqrt(2.0));
  // 2 phi(z) + z erf(z / sqrt 2) is E|Z + z| scaled, hence non-negative.
  return t.lambda * normal_pdf(mu1 / std::sqrt(var1)) * std::max(bracket, 0.0);
}

TrendIndices trend_indices(const PointwiseMoments& m) {
  const Eigen::Index p = m.size();
  if (p < 1 || m.mu_d1.size() != p || m.var_d1.size() != p ||
      m.var_d2.size() != p || m.cov_d1d2.size() != p || m.mu_d2.size() != p) {
    throw Error(ErrorCode::kInvalidInput, "inconsistent moment sizes");
  }
  TrendIndices out;
  out.grid = m.grid;
  out.tdi.resize(static_cast<std::size_t>(p));
  out.deti.resize(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double v1 = std::max(m.var_d1(i), 0.0);
    const double v2 = std::max(m.var_d2(i), 0.0);
    out.tdi[k] = tdi_at(m.mu_d1(i), v1);
    if (v1 <= 0.0 || v2 <= 0.0) {
      out.deti[k] = 0.0;
      out.flagged.push_back(static_cast<int>(i));
      continue;
    }
    try {
      out.deti[k] = deti_at(m.mu_d1(i), m.mu_d2(i), v1, v2, m.cov_d1d2(i));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateCorrelation) throw;
      out.deti[k] = 0.0;
      out.flagged.push_back(static_cast<int>(i));
    }
  }
  out.eti = trapezoid(out.grid, out.deti);
  return out;
}

TrendIndices trend_indices(const PosteriorMoments& m) {
  return trend_indices(m.pointwise());
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) {
    throw Error(ErrorCode::kInsufficientData, "quantile of empty sample");
  }
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

IndexPosteriorSummary summarize_over_chain(const ScoreSeries& s,
                                           const HyperChain& chain,
                                           std::span<const double> grid,
                                           const SummaryOptions& opts) {
  if (chain.draws.empty()) {
    throw Error(ErrorCode::kInsufficientData, "empty hyperparameter chain");
  }
  const std::size_t n = chain.draws.size();
  const std::size_t cap = static_cast<std::size_t>(std::max(1, opts.max_draws));
  const std::size_t stride = (n + cap - 1) / cap;
  std::vector<std::size_t> picks;
  for (std::size_t i = 0; i < n; i += stride) picks.push_back(i);

  std::vector<TrendIndices> results(picks.size());
  std::vector<char> ok(picks.size(), 0);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < picks.size(); k = next++) {
      try {
        const auto pm = pointwise_moments(s, chain.draws[picks[k]], grid);
        results[k] = trend_indices(pm);
        ok[k] = 1;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kFactorizationFailure) throw;
      }
    }
  };
  int workers = opts.workers > 0
                    ? opts.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, static_cast<int>(picks.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          work();
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = picks.size();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  IndexPosteriorSummary out;
  out.grid.assign(grid.begin(), grid.end());
  std::vector<const TrendIndices*> good;
  for (std::size_t k = 0; k < picks.size(); ++k) {
    if (ok[k]) good.push_back(&results[k]);
  }
  out.draws_used = static_cast<int>(good.size());
  out.draws_skipped = static_cast<int>(picks.size() - good.size());
  if (good.empty() ||
      out.draws_skipped > opts.max_skip_fraction * static_cast<double>(picks.size())) {
    throw Error(ErrorCode::kFactorizationFailure,
                std::to_string(out.draws_skipped) + " of " +
                    std::to_string(picks.size()) +
                    " hyperparameter draws could not be factorized");
  }

  const std::size_t p = grid.size();
  out.tdi_mean.resize(p);
  out.tdi_q05.resize(p);
  out.tdi_q50.resize(p);
  out.tdi_q95.resize(p);
  out.deti_mean.resize(p);
  out.deti_q50.resize(p);
  std::vector<double> tdi_col(good.size()), deti_col(good.size());
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t k = 0; k < good.size(); ++k) {
      tdi_col[k] = good[k]->tdi[i];
      deti_col[k] = good[k]->deti[i];
    }
    out.tdi_mean[i] = mean_of(tdi_col);
    out.tdi_q05[i] = quantile(tdi_col, 0.05);
    out.tdi_q50[i] = quantile(tdi_col, 0.50);
    out.tdi_q95[i] = quantile(tdi_col, 0.95);
    out.deti_mean[i] = mean_of(deti_col);
    out.deti_q50[i] = quantile(deti_col, 0.50);
  }
  for (const auto* r : good) out.eti_draws.push_back(r->eti);
  out.eti_mean = mean_of(out.eti_draws);
  out.eti_median = quantile(out.eti_draws, 0.5);
  out.eti_q025 = quantile(out.eti_draws, 0.025);
  out.eti_q975 = quantile(out.eti_draws, 0.975);
  return out;
}

std::string summary_to_json(const IndexPosteriorSummary& s) {
  nlohmann::ordered_json j;
  j["grid"] = s.grid;
  j["tdi_mean"] = s.tdi_mean;
  j["tdi_q05"] = s.tdi_q05;
  j["tdi_q50"] = s.tdi_q50;
  j["tdi_q95"] = s.tdi_q95;
  j["deti_mean"] = s.deti_mean;
  j["deti_q50"] = s.deti_q50;
  j["eti_median"] = s.eti_median;
  j["eti_mean"] = s.eti_mean;
  j["eti_q025"] = s.eti_q025;
  j["eti_q975"] = s.eti_q975;
  j["eti_draws"] = s.eti_draws;
  j["draws_used"] = s.draws_used;
  j["draws_skipped"] = s.draws_skipped;
  return j.dump();
}

IndexPosteriorSummary summary_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    IndexPosteriorSummary s;
    s.grid = j.at("grid").get<std::vector<double>>();
    s.tdi_mean = j.at("tdi_mean").get<std::vector<double>>();
    s.tdi_q05 = j.at("tdi_q05").get<std::vector<double>>();
    s.tdi_q50 = j.at("tdi_q50").get<std::vector<double>>();
    s.tdi_q95 = j.at("tdi_q95").get<std::vector<double>>();
    s.deti_mean = j.value("deti_mean", std::vector<double>{});
    s.deti_q50 = j.at("deti_q50").get<std::vector<double>>();
    s.eti_median = j.at("eti_median").get<double>();
    s.eti_mean = j.at("eti_mean").get<double>();
    s.eti_q025 = j.at("eti_q025").get<double>();
    s.eti_q975 = j.at("eti_q975").get<double>();
    s.eti_draws = j.value("eti_draws", std::vector<double>{});
    s.draws_used = j.value("draws_used", 0);
    s.draws_skipped = j.value("draws_skipped", 0);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput,
                std::string("bad summary JSON: ") + e.what());
  }
}

}  // namespace scoretrend
