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
#include <limits>
#include <mutex>
#include <numeric>
#include <random>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "scoretrend/error.hpp"
#include "scoretrend/inference.hpp"

namespace scoretrend {
namespace {

// Objective wrapper handed to GSL. Tracks the best point ever evaluated so
// a failed line search still yields the incumbent.
struct Objective {
  const ScoreSeries* series = nullptr;
  double best_value = std::numeric_limits<double>::infinity();
  UnconstrainedParams best_u = UnconstrainedParams::Zero();

  // Negative log-likelihood; +large for infeasible points so the line
  // search backs off.
  double eval(const UnconstrainedParams& u, UnconstrainedParams* grad) {
    constexpr double kInfeasible = 1e100;
    if (!u.allFinite() || (u.tail<3>().array().abs() > 30.0).any()) {
      if (grad) grad->setZero();
      return kInfeasible;
    }
    try {
      const Hyperparams theta = from_unconstrained(u);
      double value = 0.0;
      if (grad) {
        const auto lg = marginal_loglik_gradient(theta, *series);
        value = -lg.value;
        *grad = -lg.gradient;
      } else {
        value = -marginal_loglik(theta, *series);
      }
      if (!std::isfinite(value)) {
        if (grad) grad->setZero();
        return kInfeasible;
      }
      if (value < best_value) {
        best_value = value;
        best_u = u;
      }
      return value;
    } catch (const Error&) {
      if (grad) grad->setZero();
      return kInfeasible;
    }
  }
};

UnconstrainedParams from_gsl(const gsl_vector* x) {
  return {gsl_vector_get(x, 0), gsl_vector_get(x, 1), gsl_vector_get(x, 2),
          gsl_vector_get(x, 3)};
}

void to_gsl(const UnconstrainedParams& u, gsl_vector* x) {
  for (int i = 0; i < 4; ++i) gsl_vector_set(x, i, u(i));
}

double gsl_f(const gsl_vector* x, void* params) {
  return static_cast<Objective*>(params)->eval(from_gsl(x), nullptr);
}

void gsl_df(const gsl_vector* x, void* params, gsl_vector* g) {
  UnconstrainedParams grad;
  static_cast<Objective*>(params)->eval(from_gsl(x), &grad);
  to_gsl(grad, g);
}

void gsl_fdf(const gsl_vector* x, void* params, double* f, gsl_vector* g) {
  UnconstrainedParams grad;
  *f = static_cast<Objective*>(params)->eval(from_gsl(x), &grad);
  to_gsl(grad, g);
}

void disable_gsl_abort() {
  static std::once_flag flag;
  std::call_once(flag, [] { gsl_set_error_handler_off(); });
}

// Runs BFGS from `start`; returns the best point seen and its objective.
std::pair<UnconstrainedParams, double> minimize_from(
    const ScoreSeries& s, const UnconstrainedParams& start,
    const MleOptions& opts) {
  Objective obj;
  obj.series = &s;

  gsl_multimin_function_fdf fdf;
  fdf.n = 4;
  fdf.f = &gsl_f;
  fdf.df = &gsl_df;
  fdf.fdf = &gsl_fdf;
  fdf.params = &obj;

  gsl_vector* x = gsl_vector_alloc(4);
  to_gsl(start, x);
  gsl_multimin_fdfminimizer* m = gsl_multimin_fdfminimizer_alloc(
      gsl_multimin_fdfminimizer_vector_bfgs2, 4);
  gsl_multimin_fdfminimizer_set(m, &fdf, x, 0.1, 0.1);

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (gsl_multimin_fdfminimizer_iterate(m) != GSL_SUCCESS) break;
    if (gsl_multimin_test_gradient(m->gradient, opts.gradient_tol) ==
        GSL_SUCCESS) {
      break;
    }
  }
  gsl_multimin_fdfminimizer_free(m);
  gsl_vector_free(x);
  return {obj.best_u, obj.best_value};
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<Hyperparams> heuristic_starts(const ScoreSeries& s) {
  if (s.times.empty()) {
    throw Error(ErrorCode::kInvalidInput, "empty series");
  }
  const double beta0 = mean_of(s.diffs);
  double sd = sd_of(s.diffs);
  if (!(sd > 0.0)) sd = 1.0;
  const auto [tmin, tmax] = std::minmax_element(s.times.begin(), s.times.end());
  double range = *tmax - *tmin;
  if (!(range > 0.0)) range = s.domain_end;

  std::vector<Hyperparams> out;
  for (double rho0 : {range / 10.0, range / 4.0}) {
    for (double sigma0 : {1.0, sd / 4.0}) {
      out.push_back({beta0, sd, rho0, sigma0});
    }
  }
  return out;
}

MleFit fit_mle(const ScoreSeries& s, const MleOptions& opts) {
  disable_gsl_abort();
  const auto base = heuristic_starts(s);
  std::vector<Hyperparams> starts;
  const int n_starts = std::max(1, opts.starts);
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  const double sd = std::max(base.front().alpha, 1e-3);
  for (int k = 0; k < n_starts; ++k) {
    Hyperparams h = base[static_cast<std::size_t>(k) % base.size()];
    if (k >= static_cast<int>(base.size())) {
      h.beta += 0.5 * sd * normal(rng);
      h.alpha *= std::exp(0.5 * normal(rng));
      h.rho *= std::exp(0.5 * normal(rng));
      h.sigma *= std::exp(0.5 * normal(rng));
    }
    starts.push_back(h);
  }
  for (const auto& h : opts.extra_starts) {
    require_valid(h);
    starts.push_back(h);
  }

  MleFit fit;
  double best = std::numeric_limits<double>::infinity();
  UnconstrainedParams best_u = UnconstrainedParams::Zero();
  for (const auto& h : starts) {
    double init = -std::numeric_limits<double>::infinity();
    try {
      init = marginal_loglik(h, s);
    } catch (const Error&) {
    }
    fit.initial.push_back(h);
    fit.initial_loglik.push_back(init);

    const auto [u, value] = minimize_from(s, to_unconstrained(h), opts);
    if (value < best) {
      best = value;
      best_u = u;
    }
  }
  if (!std::isfinite(best) || best >= 1e99) {
    throw Error(ErrorCode::kOptimizerDiverged,
                "marginal likelihood not finite at any start");
  }
  fit.theta = from_unconstrained(best_u);
  fit.loglik = -best;
  return fit;
}

}  // namespace scoretrend
