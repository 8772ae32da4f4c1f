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

#include <cmath>

#include "scoretrend/error.hpp"
#include "scoretrend/inference.hpp"

namespace scoretrend {
namespace {

Eigen::VectorXd residuals(const ScoreSeries& s, const Hyperparams& theta) {
  if (s.times.empty() || s.times.size() != s.diffs.size()) {
    throw Error(ErrorCode::kInvalidInput,
                "series must have matching, non-empty times and diffs");
  }
  Eigen::VectorXd r(static_cast<Eigen::Index>(s.size()));
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    r(i) = s.diffs[i] - mean_fn(0, s.times[i], theta);
  }
  return r;
}

}  // namespace

UnconstrainedParams to_unconstrained(const Hyperparams& theta) {
  return {theta.beta, std::log(theta.alpha), std::log(theta.rho),
          std::log(theta.sigma)};
}

Hyperparams from_unconstrained(const UnconstrainedParams& u) {
  return {u(0), std::exp(u(1)), std::exp(u(2)), std::exp(u(3))};
}

double marginal_loglik(const Hyperparams& theta, const ScoreSeries& s,
                       const JitterPolicy& jitter) {
  const Eigen::VectorXd r = residuals(s, theta);
  const NoisyGramFactor factor(s.times, theta, jitter);
  const Eigen::VectorXd w = factor.half_solve(r);
  return -0.5 * factor.log_determinant() - 0.5 * w.squaredNorm();
}

LoglikGradient marginal_loglik_gradient(const Hyperparams& theta,
                                        const ScoreSeries& s,
                                        const JitterPolicy& jitter) {
  const Eigen::VectorXd r = residuals(s, theta);
  const NoisyGramFactor factor(s.times, theta, jitter);
  const auto n = factor.size();

  const Eigen::VectorXd a = factor.solve(r);
  const Eigen::MatrixXd k_inv =
      factor.solve(Eigen::MatrixXd::Identity(n, n));

  LoglikGradient out;
  out.value = -0.5 * factor.log_determinant() - 0.5 * r.dot(a);

  // dL/dpsi = 1/2 tr((a a^T - K^-1) dK/dpsi).
  const Eigen::MatrixXd q = a * a.transpose() - k_inv;
  const Eigen::MatrixXd c = gram(0, 0, s.times, s.times, theta);
  Eigen::MatrixXd lag2(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = (s.times[i] - s.times[j]) / theta.rho;
      lag2(i, j) = d * d;
    }
  }
  out.gradient(0) = a.sum();
  out.gradient(1) = (q.array() * c.array()).sum();  // dK = 2C
  out.gradient(2) = 0.5 * (q.array() * c.array() * lag2.array()).sum();
  out.gradient(3) = theta.sigma * theta.sigma * q.trace();  // dK = 2 sigma^2 I
  return out;
}

}  // namespace scoretrend
