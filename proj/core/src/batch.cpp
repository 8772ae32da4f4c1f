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
#include <atomic>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "scoretrend/error.hpp"
#include "scoretrend/io.hpp"
#include "scoretrend/pipeline.hpp"

namespace scoretrend {
namespace {

using Json = nlohmann::ordered_json;

Json params_json(const Hyperparams& h) {
  return {{"beta", h.beta}, {"alpha", h.alpha}, {"rho", h.rho},
          {"sigma", h.sigma}};
}

Json record_json(const MatchEtiRecord& r) {
  return {{"match_id", r.match_id},   {"date", r.date},
          {"home_team", r.home_team}, {"away_team", r.away_team},
          {"eti_median", r.eti_median}};
}

MatchEtiRecord record_from(const nlohmann::json& j) {
  return {j.at("match_id").get<std::string>(), j.value("date", ""),
          j.value("home_team", ""), j.value("away_team", ""),
          j.at("eti_median").get<double>()};
}

MatchEtiRecord record_of(const MatchResult& r) {
  return {r.series.match_id, r.series.date, r.series.home_team,
          r.series.away_team, r.summary.eti_median};
}

}  // namespace

std::string PipelineConfig::to_json() const {
  Json j;
  j["grid_points"] = grid_points;
  j["domain_end"] = domain_end;
  j["prior_scale"] = prior_scale;
  j["prior_df"] = prior_df;
  j["n_chains"] = mcmc.n_chains;
  j["n_iter"] = mcmc.n_iter;
  j["warmup_frac"] = mcmc.warmup_frac;
  j["target_accept"] = mcmc.target_accept;
  j["thin"] = mcmc.thin;
  j["mle_starts"] = mle.starts;
  j["mle_max_iter"] = mle.max_iter;
  j["max_summary_draws"] = summary.max_draws;
  j["seed"] = seed;
  return j.dump();
}

PipelineConfig PipelineConfig::from_json(const std::string& text,
                                         PipelineConfig base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput,
                std::string("bad config JSON: ") + e.what());
  }
  try {
    auto take = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    take("grid_points", base.grid_points);
    take("domain_end", base.domain_end);
    take("prior_scale", base.prior_scale);
    take("prior_df", base.prior_df);
    take("n_chains", base.mcmc.n_chains);
    take("n_iter", base.mcmc.n_iter);
    take("warmup_frac", base.mcmc.warmup_frac);
    take("target_accept", base.mcmc.target_accept);
    take("thin", base.mcmc.thin);
    take("mle_starts", base.mle.starts);
    take("mle_max_iter", base.mle.max_iter);
    take("max_summary_draws", base.summary.max_draws);
    take("seed", base.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput,
                std::string("bad config field: ") + e.what());
  }
  return base;
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  return from_json(text, PipelineConfig{});
}

std::string PipelineConfig::hash() const { return to_hex(fnv1a64(to_json())); }

std::uint64_t match_seed(std::uint64_t seed, const std::string& match_id) {
  // splitmix64 finalizer over (seed, id hash).
  std::uint64_t z = seed ^ (fnv1a64(match_id) + 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

MatchResult fit_match(const ScoreSeries& series, const PipelineConfig& config) {
  if (config.grid_points < 2) {
    throw Error(ErrorCode::kInvalidInput, "grid_points must be >= 2");
  }
  MatchResult r;
  r.series = series;
  r.warnings = validate_series(series);
  const std::uint64_t seed = match_seed(config.seed, series.match_id);

  MleOptions mle_opts = config.mle;
  mle_opts.seed = seed;
  r.mle = fit_mle(series, mle_opts);
  r.prior = make_prior(r.mle.theta, config.prior_scale, config.prior_df);
  r.chain = sample_hyper_posterior(series, r.prior, config.mcmc, seed);
  r.warnings.insert(r.warnings.end(), r.chain.warnings.begin(),
                    r.chain.warnings.end());

  const auto grid = equidistant_grid(series.domain_end, config.grid_points);
  r.moments_at_mle = pointwise_moments(series, r.mle.theta, grid);
  r.summary = summarize_over_chain(series, r.chain, grid, config.summary);
  if (r.summary.draws_skipped > 0) {
    r.warnings.push_back(std::to_string(r.summary.draws_skipped) +
                         " hyperparameter draws skipped (factorization)");
  }
  return r;
}

void write_bundle(const std::filesystem::path& dir, const MatchResult& r) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "series.json", series_to_json(r.series));

  Json mle;
  mle["theta"] = params_json(r.mle.theta);
  mle["loglik"] = r.mle.loglik;
  mle["prior"] = {{"beta_loc", r.prior.beta_loc},
                  {"alpha_loc", r.prior.alpha_loc},
                  {"rho_loc", r.prior.rho_loc},
                  {"sigma_loc", r.prior.sigma_loc},
                  {"scale", r.prior.scale},
                  {"df", r.prior.df}};
  Json diag = Json::object();
  static constexpr const char* kNames[] = {"beta", "alpha", "rho", "sigma"};
  for (int k = 0; k < 4; ++k) {
    diag[kNames[k]] = {{"rhat", r.chain.diagnostics[static_cast<std::size_t>(k)].rhat},
                       {"ess", r.chain.diagnostics[static_cast<std::size_t>(k)].ess}};
  }
  mle["mcmc"] = {{"n_chains", r.chain.n_chains},
                 {"n_iter", r.chain.n_iter},
                 {"n_warmup", r.chain.n_warmup},
                 {"thin", r.chain.thin},
                 {"acceptance", r.chain.acceptance},
                 {"diagnostics", diag}};
  mle["warnings"] = r.warnings;
  write_file_atomic(dir / "mle.json", mle.dump(2));

  std::ostringstream chain_csv;
  write_chain_csv(chain_csv, r.chain);
  write_file_atomic(dir / "chain.csv", chain_csv.str());
  write_file_atomic(dir / "posterior_mle.json", moments_to_json(r.moments_at_mle));
  write_file_atomic(dir / "indices.json", summary_to_json(r.summary));
}

std::string sanitize_id(const std::string& id) {
  std::string out;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

SeasonRun run_season(const std::vector<ScoreSeries>& matches,
                     const PipelineConfig& config,
                     const std::filesystem::path& out_dir,
                     const SeasonRunOptions& opts) {
  const std::string key = config.hash();
  const auto cache_dir = out_dir / "cache";
  std::filesystem::create_directories(cache_dir);

  std::mutex log_mutex;
  auto log = [&](const std::string& line) {
    if (!opts.log) return;
    std::lock_guard lock(log_mutex);
    opts.log(line);
  };

  std::vector<std::optional<MatchEtiRecord>> records(matches.size());
  std::vector<std::string> errors(matches.size());
  std::atomic<std::size_t> next{0};
  std::atomic<int> hits{0};
  std::atomic<int> computed{0};

  auto work = [&] {
    for (std::size_t i = next++; i < matches.size(); i = next++) {
      const auto& s = matches[i];
      const auto cache_file =
          cache_dir / (sanitize_id(s.match_id) + "-" + key + ".json");
      try {
        if (std::filesystem::exists(cache_file)) {
          records[i] = record_from(nlohmann::json::parse(read_file(cache_file)));
          ++hits;
          log("cache hit: " + s.match_id);
          continue;
        }
        const auto result = fit_match(s, config);
        write_bundle(out_dir / "matches" / sanitize_id(s.match_id), result);
        const auto rec = record_of(result);
        Json cached = record_json(rec);
        cached["config_hash"] = key;
        write_file_atomic(cache_file, cached.dump());
        records[i] = rec;
        ++computed;
        log("fitted " + s.match_id + ": eti_median " +
            std::to_string(rec.eti_median));
      } catch (const std::exception& e) {
        errors[i] = e.what();
        log("failed " + s.match_id + ": " + e.what());
      }
    }
  };

  const int workers = std::clamp(opts.workers, 1,
                                 std::max(1, static_cast<int>(matches.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  SeasonRun run;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    if (records[i]) {
      run.records.push_back(*records[i]);
    } else {
      run.failed.push_back(matches[i].match_id);
    }
  }
  run.cache_hits = hits;
  run.computed = computed;
  run.exceeds_failure_threshold =
      matches.empty() ||
      static_cast<double>(run.failed.size()) >
          opts.max_failure_fraction * static_cast<double>(matches.size());
  return run;
}

std::vector<std::string> write_season_outputs(
    const std::filesystem::path& out_dir,
    const std::vector<MatchEtiRecord>& records, int c_max,
    const std::function<void(const std::string&)>& log) {
  std::vector<std::string> written;
  write_file_atomic(out_dir / "season_eti.csv", season_eti_csv(records));
  written.push_back("season_eti.csv");
  try {
    auto table = team_table(records);
    const int c = std::min<int>(c_max, static_cast<int>(table.size()));
    const auto clusters = cluster_teams(records, c);
    apply_labels(table, clusters);
    write_file_atomic(out_dir / "team_table.csv", team_table_csv(table));
    write_file_atomic(out_dir / "clusters.json", clusters_json(clusters));
    written.push_back("team_table.csv");
    written.push_back("clusters.json");
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInsufficientData) throw;
    if (log) log(std::string("team table and clusters skipped: ") + e.what());
  }
  return written;
}

}  // namespace scoretrend
