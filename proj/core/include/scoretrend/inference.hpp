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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "scoretrend/ingest.hpp"
#include "scoretrend/kernel.hpp"
#include "scoretrend/noisy_gram.hpp"

namespace scoretrend {

// ---------------------------------------------------------------------------
// Marginal likelihood

/// log L = -1/2 log|C + sigma^2 I| - 1/2 r^T (C + sigma^2 I)^-1 r with
/// r = D - beta, the 2 pi constant dropped. Throws
/// Error{kFactorizationFailure}.
double marginal_loglik(const Hyperparams& theta, const ScoreSeries& s,
                       const JitterPolicy& jitter = {});

/// Unconstrained coordinates (beta, log alpha, log rho, log sigma).
using UnconstrainedParams = Eigen::Vector4d;

UnconstrainedParams to_unconstrained(const Hyperparams& theta);
Hyperparams from_unconstrained(const UnconstrainedParams& u);

struct LoglikGradient {
  double value = 0.0;
  /// Gradient with respect to the unconstrained coordinates.
  UnconstrainedParams gradient = UnconstrainedParams::Zero();
};

LoglikGradient marginal_loglik_gradient(const Hyperparams& theta,
                                        const ScoreSeries& s,
                                        const JitterPolicy& jitter = {});

// ---------------------------------------------------------------------------
// Maximum likelihood

struct MleOptions {
  /// Multi-start count; the first four are moment heuristics, the rest are
  /// jittered copies of them.
  int starts = 8;
  std::uint64_t seed = 0;
  int max_iter = 400;
  double gradient_tol = 1e-5;
  /// Extra starting points tried after the multi-start set.
  std::vector<Hyperparams> extra_starts;
};

struct MleFit {
  Hyperparams theta;
  double loglik = 0.0;
  std::vector<Hyperparams> initial;
  std::vector<double> initial_loglik;
};

/// Multi-start quasi-Newton maximization over the unconstrained
/// coordinates. Throws Error{kOptimizerDiverged} if no start yields a
/// finite objective.
MleFit fit_mle(const ScoreSeries& s, const MleOptions& opts = {});

/// The deterministic moment-based initializers used by fit_mle.
std::vector<Hyperparams> heuristic_starts(const ScoreSeries& s);

// ---------------------------------------------------------------------------
// Hyperprior

/// Independent location-scale Student-t priors. beta is untruncated;
/// alpha, rho and sigma are truncated to (0, inf) and renormalized.
struct PriorSpec {
  double beta_loc = 0.0;
  double alpha_loc = 1.0;
  double rho_loc = 1.0;
  double sigma_loc = 1.0;
  double scale = 5.0;
  double df = 4.0;

  bool valid() const;
};

/// Prior centred at the given (maximum-likelihood) estimate.
PriorSpec make_prior(const Hyperparams& center, double scale = 5.0,
                     double df = 4.0);

/// Log-density of a location-scale t, optionally truncated to (0, inf).
double student_t_logpdf(double x, double loc, double scale, double df,
                        bool positive_truncation = false);

/// Sum of the four component log-densities.
double prior_logpdf(const Hyperparams& theta, const PriorSpec& prior);

// ---------------------------------------------------------------------------
// MCMC

struct McmcOptions {
  int n_chains = 4;
  int n_iter = 5000;
  double warmup_frac = 0.5;
  double target_accept = 0.3;
  /// Keep every `thin`-th post-warm-up iteration.
  int thin = 1;
  /// Threads used for chains; 0 means one per chain.
  int workers = 0;
  /// Test hook: when false the target is the prior alone.
  bool use_likelihood = true;
  JitterPolicy jitter;
};

struct ParamDiagnostics {
  double rhat = 0.0;
  double ess = 0.0;
};

/// Post-warm-up draws of all chains, concatenated chain by chain.
struct HyperChain {
  std::vector<Hyperparams> draws;
  /// marginal_loglik + prior_logpdf at each draw (the likelihood term is 0
  /// when it was disabled).
  std::vector<double> log_post;
  /// 1-based iteration index of each draw within its chain, warm-up
  /// included.
  std::vector<int> iteration;
  int n_chains = 0;
  int n_iter = 0;
  int n_warmup = 0;
  int thin = 1;
  std::vector<double> acceptance;
  /// beta, alpha, rho, sigma.
  std::array<ParamDiagnostics, 4> diagnostics{};
  std::vector<std::string> warnings;

  int draws_per_chain() const {
    return n_chains > 0 ? static_cast<int>(draws.size()) / n_chains : 0;
  }
  /// Values of parameter `k` (0..3) split by chain.
  std::vector<std::vector<double>> by_chain(int k) const;
};

/// Adaptive random-walk Metropolis on the unconstrained coordinates
/// targeting marginal_loglik + prior_logpdf + log-Jacobian. Chains start
/// at the prior location with a small jitter and are seeded from
/// (seed, chain index). Throws Error{kChainDiverged}.
HyperChain sample_hyper_posterior(const ScoreSeries& s, const PriorSpec& prior,
                                  const McmcOptions& opts, std::uint64_t seed);

/// `chain,iter,beta,alpha,rho,sigma,log_post`.
void write_chain_csv(std::ostream& out, const HyperChain& chain);
HyperChain read_chain_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Convergence diagnostics

/// Split potential scale reduction factor.
double split_rhat(const std::vector<std::vector<double>>& chains);

/// Effective sample size over split chains with Geyer's initial monotone
/// sequence truncation.
double effective_sample_size(const std::vector<std::vector<double>>& chains);

}  // namespace scoretrend
