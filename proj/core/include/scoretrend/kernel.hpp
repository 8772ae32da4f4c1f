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

#include <Eigen/Core>

namespace scoretrend {

/// Hyperparameters of the latent score-difference process: constant prior
/// mean `beta`, kernel amplitude SD `alpha`, length-scale `rho` (minutes)
/// and observation noise SD `sigma`.
struct Hyperparams {
  double beta = 0.0;
  double alpha = 1.0;
  double rho = 1.0;
  double sigma = 1.0;

  /// alpha, rho, sigma strictly positive and finite; beta finite.
  bool valid() const;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// Throws Error{kInvalidInput} unless `theta.valid()`.
void require_valid(const Hyperparams& theta);

/// Squared-exponential covariance alpha^2 exp(-(s-t)^2 / (2 rho^2)).
double se_cov(double s, double t, const Hyperparams& theta);

/// d^a/ds^a d^b/dt^b of se_cov, for a, b in {0, 1, 2}.
///
/// With u = (s - t) / rho the derivative is
///   (-1)^b rho^-(a+b) (-1)^(a+b) He_{a+b}(u) alpha^2 exp(-u^2/2),
/// He_n being the probabilists' Hermite polynomials. Throws
/// Error{kUnsupportedOrder} outside {0,1,2}^2.
double se_cov_partial(int a, int b, double s, double t,
                      const Hyperparams& theta);

/// Prior mean function and its time derivatives: beta, 0, 0.
double mean_fn(int order, double t, const Hyperparams& theta);

/// Matrix with entries se_cov_partial(a, b, grid1[i], grid2[j], theta).
Eigen::MatrixXd gram(int a, int b, std::span<const double> grid1,
                     std::span<const double> grid2, const Hyperparams& theta);

}  // namespace scoretrend
