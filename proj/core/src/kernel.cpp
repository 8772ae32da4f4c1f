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

#include "scoretrend/kernel.hpp"

#include <cmath>
#include <string>

#include "scoretrend/error.hpp"

namespace scoretrend {
namespace {

void check_order(int a, int b) {
  if (a < 0 || a > 2 || b < 0 || b > 2) {
    throw Error(ErrorCode::kUnsupportedOrder,
                "kernel derivative order (" + std::to_string(a) + ", " +
                    std::to_string(b) + ") not in {0,1,2}^2");
  }
}

// Probabilists' Hermite polynomial He_n(u) for n <= 4.
double hermite(int n, double u) {
  const double u2 = u * u;
  switch (n) {
    case 0: return 1.0;
    case 1: return u;
    case 2: return u2 - 1.0;
    case 3: return u * (u2 - 3.0);
    default: return u2 * (u2 - 6.0) + 3.0;
  }
}

// Assumes a valid order; `lag` is s - t.
double partial_at_lag(int a, int b, double lag, const Hyperparams& theta) {
  const int n = a + b;
  const double u = lag / theta.rho;
  const double base = theta.alpha * theta.alpha * std::exp(-0.5 * u * u);
  // d/ds acts as d/dlag and d/dt as -d/dlag; the n-th lag derivative of
  // exp(-u^2/2) is (-1/rho)^n He_n(u) exp(-u^2/2).
  const double sign = ((b + n) % 2 == 0) ? 1.0 : -1.0;
  return sign * std::pow(theta.rho, -n) * hermite(n, u) * base;
}

}  // namespace

bool Hyperparams::valid() const {
  return std::isfinite(beta) && std::isfinite(alpha) && alpha > 0.0 &&
         std::isfinite(rho) && rho > 0.0 && std::isfinite(sigma) &&
         sigma > 0.0;
}

void require_valid(const Hyperparams& theta) {
  if (!theta.valid()) {
    throw Error(ErrorCode::kInvalidInput,
                "hyperparameters must satisfy alpha, rho, sigma > 0 and be "
                "finite");
  }
}

double se_cov(double s, double t, const Hyperparams& theta) {
  const double u = (s - t) / theta.rho;
  return theta.alpha * theta.alpha * std::exp(-0.5 * u * u);
}

double se_cov_partial(int a, int b, double s, double t,
                      const Hyperparams& theta) {
  check_order(a, b);
  return partial_at_lag(a, b, s - t, theta);
}

double mean_fn(int order, double /*t*/, const Hyperparams& theta) {
  if (order < 0 || order > 2) {
    throw Error(ErrorCode::kUnsupportedOrder,
                "mean derivative order " + std::to_string(order));
  }
  return order == 0 ? theta.beta : 0.0;
}

Eigen::MatrixXd gram(int a, int b, std::span<const double> grid1,
                     std::span<const double> grid2, const Hyperparams& theta) {
  check_order(a, b);
  const auto n1 = static_cast<Eigen::Index>(grid1.size());
  const auto n2 = static_cast<Eigen::Index>(grid2.size());
  Eigen::MatrixXd out(n1, n2);
  for (Eigen::Index j = 0; j < n2; ++j) {
    for (Eigen::Index i = 0; i < n1; ++i) {
      out(i, j) = partial_at_lag(a, b, grid1[i] - grid2[j], theta);
    }
  }
  return out;
}

}  // namespace scoretrend
