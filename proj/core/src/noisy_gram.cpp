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

#include "scoretrend/noisy_gram.hpp"

#include <cmath>

#include "scoretrend/error.hpp"

namespace scoretrend {

NoisyGramFactor::NoisyGramFactor(std::span<const double> times,
                                 const Hyperparams& theta,
                                 const JitterPolicy& policy) {
  require_valid(theta);
  Eigen::MatrixXd k = gram(0, 0, times, times, theta);
  k.diagonal().array() += theta.sigma * theta.sigma;

  // The first attempt is unjittered; duplicate times with tiny sigma are
  // the common reason to escalate.
  const double scale = theta.alpha * theta.alpha;
  double eps = 0.0;
  for (;;) {
    if (eps > 0.0) {
      Eigen::MatrixXd kj = k;
      kj.diagonal().array() += eps * scale;
      llt_.compute(kj);
    } else {
      llt_.compute(k);
    }
    if (llt_.info() == Eigen::Success &&
        llt_.matrixLLT().diagonal().minCoeff() > 0.0) {
      jitter_ = eps * scale;
      return;
    }
    eps = (eps == 0.0) ? policy.initial : eps * policy.growth;
    if (eps > policy.maximum * (1.0 + 1e-9)) break;
  }
  throw Error(ErrorCode::kFactorizationFailure,
              "noisy Gram matrix not positive definite after jitter");
}

Eigen::MatrixXd NoisyGramFactor::half_solve(const Eigen::MatrixXd& rhs) const {
  return llt_.matrixL().solve(rhs);
}

double NoisyGramFactor::log_determinant() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

}  // namespace scoretrend
