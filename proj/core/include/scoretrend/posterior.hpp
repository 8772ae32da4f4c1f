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

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "scoretrend/ingest.hpp"
#include "scoretrend/kernel.hpp"
#include "scoretrend/noisy_gram.hpp"

namespace scoretrend {

/// Pointwise posterior summaries on a grid: the means of (d, d', d'') and
/// the diagonals the trend indices need. This is also the JSON dump format
/// `{grid, mu_d, mu_d1, mu_d2, var_d, var_d1, var_d2, cov_d1d2}`.
struct PointwiseMoments {
  std::vector<double> grid;
  Eigen::VectorXd mu_d, mu_d1, mu_d2;
  Eigen::VectorXd var_d, var_d1, var_d2, cov_d1d2;
  /// Noise SD of the hyperparameters used; predictive variance of a new
  /// observation at t is var_d + sigma^2.
  double sigma = 0.0;
  /// Number of diagonal entries clipped from a negative value to zero.
  int clipped = 0;

  Eigen::Index size() const { return static_cast<Eigen::Index>(grid.size()); }
  Eigen::VectorXd predictive_var() const {
    return var_d.array() + sigma * sigma;
  }
};

/// Joint posterior moments of (d, d', d'') on a grid of p points.
struct PosteriorMoments {
  std::vector<double> grid;
  Hyperparams theta;
  Eigen::VectorXd mu_d, mu_d1, mu_d2;
  Eigen::MatrixXd S_dd, S_d1d1, S_d2d2;
  Eigen::MatrixXd S_dd1, S_dd2, S_d1d2;
  int clipped = 0;

  Eigen::Index size() const { return static_cast<Eigen::Index>(grid.size()); }

  PointwiseMoments pointwise() const;
};

enum class Component { kLevel = 0, kSlope = 1, kCurvature = 2 };

/// Posterior of (d, d', d'') on `grid` given the observed series. All nine
/// moment expressions share one factorization of C(t_m, t_m) + sigma^2 I.
/// Throws Error{kFactorizationFailure} for pathological hyperparameters.
PosteriorMoments posterior_moments(const ScoreSeries& s,
                                   const Hyperparams& theta,
                                   std::span<const double> grid,
                                   const JitterPolicy& jitter = {});

/// Same as posterior_moments(...).pointwise() without forming p x p blocks.
PointwiseMoments pointwise_moments(const ScoreSeries& s,
                                   const Hyperparams& theta,
                                   std::span<const double> grid,
                                   const JitterPolicy& jitter = {});

/// Assembles the requested blocks of the 3p x 3p covariance, in the order
/// given. Defaults to the full (d, d', d'') matrix.
Eigen::MatrixXd joint_covariance(
    const PosteriorMoments& m,
    std::span<const Component> components = {});
Eigen::VectorXd joint_mean(const PosteriorMoments& m,
                           std::span<const Component> components = {});

/// Draws from N(mu, Sigma) restricted to a subset of the components. The
/// factorization happens once at construction, so large draws can be taken
/// in batches.
class JointSampler {
 public:
  explicit JointSampler(const PosteriorMoments& m,
                        std::vector<Component> components = {},
                        const JitterPolicy& jitter = {});

  /// n x dim matrix, one draw per row, columns ordered component-major.
  Eigen::MatrixXd draw(Eigen::Index n, std::mt19937_64& rng) const;

  Eigen::Index dim() const { return mean_.size(); }
  /// True when the jittered Cholesky failed and the sampler fell back to a
  /// pivoted LDL^T factor with negative pivots clipped.
  bool used_pivoted_fallback() const { return pivoted_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd factor_;
  bool pivoted_ = false;
};

/// n x 3p matrix of joint (d, d', d'') draws; deterministic given `seed`.
Eigen::MatrixXd sample_joint_paths(const PosteriorMoments& m, Eigen::Index n,
                                   std::uint64_t seed);

std::string moments_to_json(const PointwiseMoments& m);
PointwiseMoments moments_from_json(const std::string& text);

}  // namespace scoretrend
