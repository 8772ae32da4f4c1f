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

#include "scoretrend/posterior.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "scoretrend/error.hpp"

namespace scoretrend {
namespace {

constexpr std::array<Component, 3> kAllComponents = {
    Component::kLevel, Component::kSlope, Component::kCurvature};

void check_inputs(const ScoreSeries& s, std::span<const double> grid) {
  if (grid.empty()) {
    throw Error(ErrorCode::kInvalidInput, "evaluation grid is empty");
  }
  if (s.times.empty() || s.times.size() != s.diffs.size()) {
    throw Error(ErrorCode::kInvalidInput,
                "series must have matching, non-empty times and diffs");
  }
}

// Cross-covariances between the process (or a derivative of order a) on
// the grid and the observations, whitened by the Cholesky factor:
// V_a = L^-1 d1^a C(t_m, grid).
struct Whitened {
  Eigen::VectorXd mean[3];
  Eigen::MatrixXd v[3];
};

Whitened whiten(const ScoreSeries& s, const Hyperparams& theta,
                std::span<const double> grid, const JitterPolicy& jitter) {
  check_inputs(s, grid);
  const NoisyGramFactor factor(s.times, theta, jitter);
  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::VectorXd resid(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    resid(i) = s.diffs[i] - mean_fn(0, s.times[i], theta);
  }
  const Eigen::VectorXd white_resid = factor.half_solve(resid);

  Whitened w;
  for (int a = 0; a < 3; ++a) {
    // d2^a C(t_m, grid) equals d1^a C(grid, t_m)^T.
    w.v[a] = factor.half_solve(gram(0, a, s.times, grid, theta));
    w.mean[a] = w.v[a].transpose() * white_resid;
    const double prior_mean = mean_fn(a, 0.0, theta);
    w.mean[a].array() += prior_mean;
  }
  return w;
}

int clip_diagonal(Eigen::Ref<Eigen::VectorXd> diag) {
  int clipped = 0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (diag(i) < 0.0) {
      diag(i) = 0.0;
      ++clipped;
    }
  }
  return clipped;
}

int clip_matrix_diagonal(Eigen::MatrixXd& m) {
  int clipped = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m(i, i) < 0.0) {
      m(i, i) = 0.0;
      ++clipped;
    }
  }
  return clipped;
}

const Eigen::MatrixXd& block_of(const PosteriorMoments& m, Component a,
                                Component b, bool& transpose) {
  const int i = static_cast<int>(a);
  const int j = static_cast<int>(b);
  transpose = i > j;
  const int lo = std::min(i, j);
  const int hi = std::max(i, j);
  if (lo == 0 && hi == 0) return m.S_dd;
  if (lo == 1 && hi == 1) return m.S_d1d1;
  if (lo == 2 && hi == 2) return m.S_d2d2;
  if (lo == 0 && hi == 1) return m.S_dd1;
  if (lo == 0 && hi == 2) return m.S_dd2;
  return m.S_d1d2;
}

const Eigen::VectorXd& mean_of(const PosteriorMoments& m, Component a) {
  switch (a) {
    case Component::kLevel: return m.mu_d;
    case Component::kSlope: return m.mu_d1;
    default: return m.mu_d2;
  }
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

}  // namespace

PointwiseMoments PosteriorMoments::pointwise() const {
  PointwiseMoments out;
  out.grid = grid;
  out.mu_d = mu_d;
  out.mu_d1 = mu_d1;
  out.mu_d2 = mu_d2;
  out.var_d = S_dd.diagonal();
  out.var_d1 = S_d1d1.diagonal();
  out.var_d2 = S_d2d2.diagonal();
  out.cov_d1d2 = S_d1d2.diagonal();
  out.sigma = theta.sigma;
  out.clipped = clipped;
  return out;
}

PosteriorMoments posterior_moments(const ScoreSeries& s,
                                   const Hyperparams& theta,
                                   std::span<const double> grid,
                                   const JitterPolicy& jitter) {
  const Whitened w = whiten(s, theta, grid, jitter);
  PosteriorMoments m;
  m.grid.assign(grid.begin(), grid.end());
  m.theta = theta;
  m.mu_d = w.mean[0];
  m.mu_d1 = w.mean[1];
  m.mu_d2 = w.mean[2];

  // Each block is prior d1^a d2^b C(grid, grid) minus
  // d1^a C(grid, t_m) K^-1 d2^b C(t_m, grid) = V_a^T V_b.
  auto block = [&](int a, int b) {
    Eigen::MatrixXd out = gram(a, b, grid, grid, theta);
    out.noalias() -= w.v[a].transpose() * w.v[b];
    return out;
  };
  m.S_dd = block(0, 0);
  m.S_d1d1 = block(1, 1);
  m.S_d2d2 = block(2, 2);
  m.S_dd1 = block(0, 1);
  m.S_dd2 = block(0, 2);
  m.S_d1d2 = block(1, 2);

  // Symmetrize the diagonal blocks against roundoff.
  for (auto* sym : {&m.S_dd, &m.S_d1d1, &m.S_d2d2}) {
    *sym = 0.5 * (*sym + sym->transpose()).eval();
    m.clipped += clip_matrix_diagonal(*sym);
  }
  return m;
}

PointwiseMoments pointwise_moments(const ScoreSeries& s,
                                   const Hyperparams& theta,
                                   std::span<const double> grid,
                                   const JitterPolicy& jitter) {
  const Whitened w = whiten(s, theta, grid, jitter);
  PointwiseMoments out;
  out.grid.assign(grid.begin(), grid.end());
  out.mu_d = w.mean[0];
  out.mu_d1 = w.mean[1];
  out.mu_d2 = w.mean[2];
  out.sigma = theta.sigma;

  auto prior = [&](int a, int b) { return se_cov_partial(a, b, 0.0, 0.0, theta); };
  out.var_d = prior(0, 0) - w.v[0].colwise().squaredNorm().transpose().array();
  out.var_d1 = prior(1, 1) - w.v[1].colwise().squaredNorm().transpose().array();
  out.var_d2 = prior(2, 2) - w.v[2].colwise().squaredNorm().transpose().array();
  out.cov_d1d2 =
      prior(1, 2) -
      (w.v[1].array() * w.v[2].array()).colwise().sum().transpose();
  out.clipped = clip_diagonal(out.var_d) + clip_diagonal(out.var_d1) +
                clip_diagonal(out.var_d2);
  return out;
}

Eigen::MatrixXd joint_covariance(const PosteriorMoments& m,
                                 std::span<const Component> components) {
  if (components.empty()) components = kAllComponents;
  const Eigen::Index p = m.size();
  const auto k = static_cast<Eigen::Index>(components.size());
  Eigen::MatrixXd out(k * p, k * p);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      bool transpose = false;
      const auto& blk = block_of(m, components[i], components[j], transpose);
      if (transpose) {
        out.block(i * p, j * p, p, p) = blk.transpose();
      } else {
        out.block(i * p, j * p, p, p) = blk;
      }
    }
  }
  return out;
}

Eigen::VectorXd joint_mean(const PosteriorMoments& m,
                           std::span<const Component> components) {
  if (components.empty()) components = kAllComponents;
  const Eigen::Index p = m.size();
  Eigen::VectorXd out(static_cast<Eigen::Index>(components.size()) * p);
  for (std::size_t i = 0; i < components.size(); ++i) {
    out.segment(static_cast<Eigen::Index>(i) * p, p) =
        mean_of(m, components[i]);
  }
  return out;
}

JointSampler::JointSampler(const PosteriorMoments& m,
                           std::vector<Component> components,
                           const JitterPolicy& jitter) {
  if (components.empty()) {
    components.assign(kAllComponents.begin(), kAllComponents.end());
  }
  mean_ = joint_mean(m, components);
  Eigen::MatrixXd cov = joint_covariance(m, components);
  cov = 0.5 * (cov + cov.transpose()).eval();

  // The derivative blocks carry different units, so the jitter is scaled
  // by the largest variance rather than alpha^2.
  const double scale = std::max(cov.diagonal().maxCoeff(), 1e-300);
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (double eps = jitter.initial; eps <= jitter.maximum * (1.0 + 1e-9);
       eps *= jitter.growth) {
    Eigen::MatrixXd cj = cov;
    cj.diagonal().array() += eps * scale;
    llt.compute(cj);
    if (llt.info() == Eigen::Success) {
      factor_ = llt.matrixL();
      return;
    }
  }

  // Smooth processes on dense grids are numerically rank deficient; a
  // pivoted LDL^T with clipped pivots samples the PSD matrix exactly.
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  if (ldlt.info() != Eigen::Success) {
    throw Error(ErrorCode::kFactorizationFailure,
                "joint posterior covariance could not be factorized");
  }
  const Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd l = ldlt.matrixL();
  l = l * d.asDiagonal();
  factor_ = ldlt.transpositionsP().transpose() * l;
  pivoted_ = true;
}

Eigen::MatrixXd JointSampler::draw(Eigen::Index n, std::mt19937_64& rng) const {
  if (n < 1) {
    throw Error(ErrorCode::kInvalidInput, "sample count must be >= 1");
  }
  std::normal_distribution<double> normal;
  Eigen::MatrixXd z(dim(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < dim(); ++i) z(i, j) = normal(rng);
  }
  Eigen::MatrixXd x = factor_ * z;
  x.colwise() += mean_;
  return x.transpose();
}

Eigen::MatrixXd sample_joint_paths(const PosteriorMoments& m, Eigen::Index n,
                                   std::uint64_t seed) {
  const JointSampler sampler(m);
  std::mt19937_64 rng(seed);
  return sampler.draw(n, rng);
}

std::string moments_to_json(const PointwiseMoments& m) {
  nlohmann::ordered_json j;
  j["grid"] = m.grid;
  j["mu_d"] = to_std(m.mu_d);
  j["mu_d1"] = to_std(m.mu_d1);
  j["mu_d2"] = to_std(m.mu_d2);
  j["var_d"] = to_std(m.var_d);
  j["var_d1"] = to_std(m.var_d1);
  j["var_d2"] = to_std(m.var_d2);
  j["cov_d1d2"] = to_std(m.cov_d1d2);
  j["sigma"] = m.sigma;
  j["clipped"] = m.clipped;
  return j.dump();
}

PointwiseMoments moments_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    PointwiseMoments m;
    m.grid = j.at("grid").get<std::vector<double>>();
    m.mu_d = to_eigen(j.at("mu_d").get<std::vector<double>>());
    m.mu_d1 = to_eigen(j.at("mu_d1").get<std::vector<double>>());
    m.mu_d2 = to_eigen(j.at("mu_d2").get<std::vector<double>>());
    m.var_d = to_eigen(j.at("var_d").get<std::vector<double>>());
    m.var_d1 = to_eigen(j.at("var_d1").get<std::vector<double>>());
    m.var_d2 = to_eigen(j.at("var_d2").get<std::vector<double>>());
    m.cov_d1d2 = to_eigen(j.at("cov_d1d2").get<std::vector<double>>());
    m.sigma = j.value("sigma", 0.0);
    m.clipped = j.value("clipped", 0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput,
                std::string("bad moments JSON: ") + e.what());
  }
}

}  // namespace scoretrend
