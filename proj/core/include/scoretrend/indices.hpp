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

#pragma once

#include <span>
#include <string>
#include <vector>

#include "scoretrend/inference.hpp"
#include "scoretrend/posterior.hpp"

namespace scoretrend {

inline constexpr int kDefaultGridPoints = 241;

/// `points` equidistant values from 0 to `end`, both included.
std::vector<double> equidistant_grid(double end = kDefaultDomainEnd,
                                     int points = kDefaultGridPoints);

/// Trapezoid rule of `y` over `x`.
double trapezoid(std::span<const double> x, std::span<const double> y);

/// Ingredients of the zero-crossing intensity of d' at one time point:
/// lambda (1/minutes), omega = corr(d', d''), zeta (dimensionless).
struct CrossingIntensityTerms {
  double lambda = 0.0;
  double omega = 0.0;
  double zeta = 0.0;
};

/// Probability that d'(t) > 0 given its posterior mean and variance. A zero
/// variance is treated as the limit: 1, 1/2 or 0 by the sign of mu1.
double tdi_at(double mu1, double var1);

/// Throws Error{kInvalidInput} for non-positive variances and
/// Error{kDegenerateCorrelation} when omega^2 is within 1e-12 of 1.
CrossingIntensityTerms crossing_terms(double var1, double var2, double cov12,
                                      double mu1, double mu2);

/// Expected rate of zero-crossings of d' at one time point:
///   lambda phi(mu1 / sd1) (2 phi(zeta) + zeta erf(zeta / sqrt 2)).
double deti_at(double mu1, double mu2, double var1, double var2,
               double cov12);

struct TrendIndices {
  std::vector<double> grid;
  std::vector<double> tdi;
  std::vector<double> deti;
  double eti = 0.0;
  /// Grid indices where variances were clipped or omega was degenerate and
  /// the sign limit / zero intensity was substituted.
  std::vector<int> flagged;
};

TrendIndices trend_indices(const PointwiseMoments& m);
TrendIndices trend_indices(const PosteriorMoments& m);

struct IndexPosteriorSummary {
  std::vector<double> grid;
  std::vector<double> tdi_mean, tdi_q05, tdi_q50, tdi_q95;
  std::vector<double> deti_mean, deti_q50;
  double eti_median = 0.0;
  double eti_mean = 0.0;
  double eti_q025 = 0.0;
  double eti_q975 = 0.0;
  /// ETI of every draw used.
  std::vector<double> eti_draws;
  int draws_used = 0;
  int draws_skipped = 0;
};

struct SummaryOptions {
  /// Thin the chain to at most this many draws.
  int max_draws = 500;
  /// Threads; 0 uses the hardware concurrency.
  int workers = 1;
  /// Fail when more than this fraction of draws cannot be factorized.
  double max_skip_fraction = 0.01;
};

/// Evaluates the trend indices at every (thinned) hyperparameter draw and
/// summarizes them with pointwise means and empirical quantiles.
IndexPosteriorSummary summarize_over_chain(const ScoreSeries& s,
                                           const HyperChain& chain,
                                           std::span<const double> grid,
                                           const SummaryOptions& opts = {});

/// Linear-interpolation sample quantile (type 7). `values` is copied.
double quantile(std::vector<double> values, double prob);

std::string summary_to_json(const IndexPosteriorSummary& s);
IndexPosteriorSummary summary_from_json(const std::string& text);

}  // namespace scoretrend
