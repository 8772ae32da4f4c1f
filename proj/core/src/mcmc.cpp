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
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "scoretrend/error.hpp"
#include "scoretrend/inference.hpp"

namespace scoretrend {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kAdaptBatch = 50;

struct Target {
  const ScoreSeries* series;
  const PriorSpec* prior;
  const McmcOptions* opts;

  // Returns the log-posterior on the constrained scale (likelihood plus
  // prior); the Jacobian is added by the caller.
  double log_post(const Hyperparams& theta) const {
    if (!theta.valid()) return kNegInf;
    double lp = prior_logpdf(theta, *prior);
    if (!std::isfinite(lp)) return kNegInf;
    if (opts->use_likelihood) {
      try {
        lp += marginal_loglik(theta, *series, opts->jitter);
      } catch (const Error&) {
        return kNegInf;
      }
    }
    return std::isfinite(lp) ? lp : kNegInf;
  }

  static double log_jacobian(const UnconstrainedParams& u) {
    return u(1) + u(2) + u(3);
  }
};

struct ChainResult {
  std::vector<Hyperparams> draws;
  std::vector<double> log_post;
  std::vector<int> iteration;
  double acceptance = 0.0;
  bool diverged = false;
  std::string failure;
};

ChainResult run_chain(const Target& target, const McmcOptions& opts,
                      int n_warmup, std::uint64_t seed, int chain_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chain_index), 0x5eedu};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const PriorSpec& prior = *target.prior;
  const UnconstrainedParams center = to_unconstrained(
      {prior.beta_loc, prior.alpha_loc, prior.rho_loc, prior.sigma_loc});
  UnconstrainedParams init_sd{0.1 * prior.scale, 0.1, 0.1, 0.1};

  ChainResult out;
  UnconstrainedParams u = center;
  double lp = kNegInf;
  for (int attempt = 0; attempt < 100 && !std::isfinite(lp); ++attempt) {
    u = center;
    for (int k = 0; k < 4; ++k) u(k) += init_sd(k) * normal(rng);
    lp = target.log_post(from_unconstrained(u));
  }
  if (!std::isfinite(lp)) {
    out.diverged = true;
    out.failure = "no finite starting point";
    return out;
  }
  double lp_u = lp + Target::log_jacobian(u);

  // Per-coordinate proposal SDs times a global scale adapted toward the
  // target acceptance rate during warm-up.
  UnconstrainedParams step{0.1 * prior.scale, 0.1, 0.1, 0.1};
  double log_lambda = std::log(2.38 / 2.0);
  int batch_accept = 0;
  int batch_index = 0;
  Eigen::Vector4d sum = Eigen::Vector4d::Zero();
  Eigen::Vector4d sum_sq = Eigen::Vector4d::Zero();
  int n_moments = 0;
  const int moments_from = n_warmup / 4;
  const int rescale_at = n_warmup / 2;

  int accepted_post = 0;
  int nonfinite_post = 0;
  const int thin = std::max(1, opts.thin);
  for (int it = 0; it < opts.n_iter; ++it) {
    const bool warm = it < n_warmup;
    const double lambda = std::exp(log_lambda);
    UnconstrainedParams prop = u;
    for (int k = 0; k < 4; ++k) prop(k) += lambda * step(k) * normal(rng);
    const Hyperparams theta_prop = from_unconstrained(prop);
    const double lp_prop = target.log_post(theta_prop);
    bool accept = false;
    if (std::isfinite(lp_prop)) {
      const double lp_prop_u = lp_prop + Target::log_jacobian(prop);
      if (std::log(unif(rng)) < lp_prop_u - lp_u) {
        accept = true;
        u = prop;
        lp = lp_prop;
        lp_u = lp_prop_u;
      }
    } else if (!warm) {
      ++nonfinite_post;
    }

    if (warm) {
      batch_accept += accept ? 1 : 0;
      if (it >= moments_from) {
        sum += u;
        sum_sq += u.cwiseProduct(u);
        ++n_moments;
      }
      if ((it + 1) % kAdaptBatch == 0) {
        ++batch_index;
        const double rate = static_cast<double>(batch_accept) / kAdaptBatch;
        log_lambda += (rate - opts.target_accept) / std::sqrt(batch_index);
        batch_accept = 0;
      }
      if (it + 1 == rescale_at && n_moments > 10) {
        const Eigen::Vector4d mean = sum / n_moments;
        const Eigen::Vector4d var =
            (sum_sq / n_moments - mean.cwiseProduct(mean)).cwiseMax(0.0);
        for (int k = 0; k < 4; ++k) {
          if (var(k) > 1e-12) step(k) = std::sqrt(var(k));
        }
        log_lambda = std::log(2.38 / 2.0);
        batch_index = 0;
      }
    } else {
      accepted_post += accept ? 1 : 0;
      const int post = it - n_warmup;
      if ((post + 1) % thin == 0) {
        out.draws.push_back(from_unconstrained(u));
        out.log_post.push_back(lp);
        out.iteration.push_back(it + 1);
      }
    }
  }
  const int n_post = opts.n_iter - n_warmup;
  out.acceptance =
      n_post > 0 ? static_cast<double>(accepted_post) / n_post : 0.0;
  if (n_post > 0 && nonfinite_post * 2 > n_post) {
    out.diverged = true;
    out.failure = "target non-finite for most post-warm-up proposals";
  }
  return out;
}

double param_of(const Hyperparams& h, int k) {
  switch (k) {
    case 0: return h.beta;
    case 1: return h.alpha;
    case 2: return h.rho;
    default: return h.sigma;
  }
}

}  // namespace

std::vector<std::vector<double>> HyperChain::by_chain(int k) const {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(n_chains));
  const int per = draws_per_chain();
  for (int c = 0; c < n_chains; ++c) {
    auto& v = out[static_cast<std::size_t>(c)];
    v.reserve(static_cast<std::size_t>(per));
    for (int i = 0; i < per; ++i) {
      v.push_back(param_of(draws[static_cast<std::size_t>(c * per + i)], k));
    }
  }
  return out;
}

HyperChain sample_hyper_posterior(const ScoreSeries& s, const PriorSpec& prior,
                                  const McmcOptions& opts,
                                  std::uint64_t seed) {
  if (!prior.valid()) {
    throw Error(ErrorCode::kInvalidInput, "invalid prior specification");
  }
  if (opts.n_chains < 1 || opts.n_iter < 2 || opts.thin < 1 ||
      !(opts.warmup_frac >= 0.0 && opts.warmup_frac < 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "invalid MCMC settings");
  }
  if (opts.use_likelihood && s.times.empty()) {
    throw Error(ErrorCode::kInvalidInput, "empty series");
  }
  const int n_warmup =
      static_cast<int>(std::floor(opts.n_iter * opts.warmup_frac));
  const Target target{&s, &prior, &opts};

  std::vector<ChainResult> results(static_cast<std::size_t>(opts.n_chains));
  const int workers =
      std::clamp(opts.workers > 0 ? opts.workers : opts.n_chains, 1,
                 opts.n_chains);
  if (workers == 1) {
    for (int c = 0; c < opts.n_chains; ++c) {
      results[static_cast<std::size_t>(c)] =
          run_chain(target, opts, n_warmup, seed, c);
    }
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int c = w; c < opts.n_chains; c += workers) {
          results[static_cast<std::size_t>(c)] =
              run_chain(target, opts, n_warmup, seed, c);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  HyperChain chain;
  chain.n_chains = opts.n_chains;
  chain.n_iter = opts.n_iter;
  chain.n_warmup = n_warmup;
  chain.thin = opts.thin;
  for (int c = 0; c < opts.n_chains; ++c) {
    auto& r = results[static_cast<std::size_t>(c)];
    if (r.diverged) {
      throw Error(ErrorCode::kChainDiverged,
                  "chain " + std::to_string(c) + ": " + r.failure);
    }
    chain.draws.insert(chain.draws.end(), r.draws.begin(), r.draws.end());
    chain.log_post.insert(chain.log_post.end(), r.log_post.begin(),
                          r.log_post.end());
    chain.iteration.insert(chain.iteration.end(), r.iteration.begin(),
                           r.iteration.end());
    chain.acceptance.push_back(r.acceptance);
  }

  static constexpr const char* kNames[] = {"beta", "alpha", "rho", "sigma"};
  if (chain.draws_per_chain() >= 4) {
    for (int k = 0; k < 4; ++k) {
      const auto split = chain.by_chain(k);
      auto& d = chain.diagnostics[static_cast<std::size_t>(k)];
      d.rhat = split_rhat(split);
      d.ess = effective_sample_size(split);
      if (d.rhat > 1.01) {
        std::ostringstream os;
        os << kNames[k] << ": split R-hat " << d.rhat << " > 1.01";
        chain.warnings.push_back(os.str());
      }
      if (d.ess < 400.0) {
        std::ostringstream os;
        os << kNames[k] << ": ESS " << d.ess << " < 400";
        chain.warnings.push_back(os.str());
      }
    }
  } else {
    chain.warnings.push_back("too few draws per chain for diagnostics");
  }
  return chain;
}

void write_chain_csv(std::ostream& out, const HyperChain& chain) {
  out << "chain,iter,beta,alpha,rho,sigma,log_post\n";
  const int per = chain.draws_per_chain();
  std::ostringstream row;
  row.precision(17);
  for (std::size_t i = 0; i < chain.draws.size(); ++i) {
    const auto& h = chain.draws[i];
    row.str({});
    row << (per > 0 ? static_cast<int>(i) / per : 0) << ','
        << chain.iteration[i] << ',' << h.beta << ',' << h.alpha << ','
        << h.rho << ',' << h.sigma << ',' << chain.log_post[i] << '\n';
    out << row.str();
  }
}

HyperChain read_chain_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line.rfind("chain,iter,beta,alpha,rho,sigma,log_post", 0) != 0) {
    throw Error(ErrorCode::kInvalidInput, "not a chain CSV");
  }
  HyperChain chain;
  int last_chain = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string field;
    std::vector<double> v;
    while (std::getline(is, field, ',')) v.push_back(std::stod(field));
    if (v.size() != 7) {
      throw Error(ErrorCode::kInvalidInput, "bad chain CSV row: " + line);
    }
    const int c = static_cast<int>(v[0]);
    if (c != last_chain) {
      ++chain.n_chains;
      last_chain = c;
    }
    chain.iteration.push_back(static_cast<int>(v[1]));
    chain.draws.push_back({v[2], v[3], v[4], v[5]});
    chain.log_post.push_back(v[6]);
  }
  return chain;
}

}  // namespace scoretrend
