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
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "scoretrend/error.hpp"
#include "scoretrend/inference.hpp"

namespace scoretrend {

bool PriorSpec::valid() const {
  return std::isfinite(beta_loc) && std::isfinite(alpha_loc) &&
         alpha_loc > 0.0 && std::isfinite(rho_loc) && rho_loc > 0.0 &&
         std::isfinite(sigma_loc) && sigma_loc > 0.0 && std::isfinite(scale) &&
         scale > 0.0 && std::isfinite(df) && df > 0.0;
}

PriorSpec make_prior(const Hyperparams& center, double scale, double df) {
  PriorSpec p{center.beta, center.alpha, center.rho, center.sigma, scale, df};
  if (!p.valid()) {
    throw Error(ErrorCode::kInvalidInput, "invalid prior specification");
  }
  return p;
}

double student_t_logpdf(double x, double loc, double scale, double df,
                        bool positive_truncation) {
  if (positive_truncation && x <= 0.0) {
    return -std::numeric_limits<double>::infinity();
  }
  const double z = (x - loc) / scale;
  double out = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
               0.5 * std::log(df * M_PI) -
               0.5 * (df + 1.0) * std::log1p(z * z / df) - std::log(scale);
  if (positive_truncation) {
    // Mass of the untruncated distribution above zero.
    const boost::math::students_t_distribution<double> t(df);
    out -= std::log(boost::math::cdf(boost::math::complement(t, -loc / scale)));
  }
  return out;
}

double prior_logpdf(const Hyperparams& theta, const PriorSpec& prior) {
  return student_t_logpdf(theta.beta, prior.beta_loc, prior.scale, prior.df) +
         student_t_logpdf(theta.alpha, prior.alpha_loc, prior.scale, prior.df,
                          true) +
         student_t_logpdf(theta.rho, prior.rho_loc, prior.scale, prior.df,
                          true) +
         student_t_logpdf(theta.sigma, prior.sigma_loc, prior.scale, prior.df,
                          true);
}

}  // namespace scoretrend
