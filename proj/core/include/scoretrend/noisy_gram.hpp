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

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "scoretrend/kernel.hpp"

namespace scoretrend {

/// Jitter schedule applied to C(t_m, t_m) + sigma^2 I: eps * alpha^2 is added
/// to the diagonal, eps running 1e-10, 1e-9, ..., 1e-6.
struct JitterPolicy {
  double initial = 1e-10;
  double growth = 10.0;
  double maximum = 1e-6;
};

/// Cholesky factor of the noisy Gram matrix of the observation times.
/// Shared by the likelihood and by every posterior moment formula so the
/// system is factorized once per hyperparameter value.
class NoisyGramFactor {
 public:
  /// Throws Error{kFactorizationFailure} if the matrix is not positive
  /// definite after the largest jitter.
  NoisyGramFactor(std::span<const double> times, const Hyperparams& theta,
                  const JitterPolicy& policy = {});

  Eigen::Index size() const { return llt_.rows(); }

  /// K^-1 rhs.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const {
    return llt_.solve(rhs);
  }
  /// L^-1 rhs, with K = L L^T.
  Eigen::MatrixXd half_solve(const Eigen::MatrixXd& rhs) const;

  double log_determinant() const;

  /// Jitter actually added to the diagonal (0 when unjittered).
  double jitter() const { return jitter_; }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_ = 0.0;
};

}  // namespace scoretrend
