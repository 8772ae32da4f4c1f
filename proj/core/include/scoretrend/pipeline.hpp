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
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "scoretrend/indices.hpp"
#include "scoretrend/inference.hpp"
#include "scoretrend/ingest.hpp"
#include "scoretrend/posterior.hpp"
#include "scoretrend/season.hpp"

namespace scoretrend {

/// Settings of the per-match pipeline (MLE, MCMC, index summaries).
struct PipelineConfig {
  int grid_points = kDefaultGridPoints;
  double domain_end = kDefaultDomainEnd;
  double prior_scale = 5.0;
  double prior_df = 4.0;
  McmcOptions mcmc;
  MleOptions mle;
  SummaryOptions summary;
  std::uint64_t seed = 1;

  /// Canonical JSON of every field that affects results.
  std::string to_json() const;
  /// Overlays the fields present in `text` onto `base`.
  static PipelineConfig from_json(const std::string& text,
                                  PipelineConfig base);
  static PipelineConfig from_json(const std::string& text);
  /// Hex digest of to_json(), used in cache keys.
  std::string hash() const;
};

struct MatchResult {
  ScoreSeries series;
  MleFit mle;
  PriorSpec prior;
  HyperChain chain;
  PointwiseMoments moments_at_mle;
  IndexPosteriorSummary summary;
  std::vector<std::string> warnings;
};

/// Seed of a match's chains, derived from the top-level seed and the id.
std::uint64_t match_seed(std::uint64_t seed, const std::string& match_id);

/// MLE -> prior -> MCMC -> posterior indices for one match.
MatchResult fit_match(const ScoreSeries& series, const PipelineConfig& config);

/// Writes series.json, mle.json, chain.csv, posterior_mle.json and
/// indices.json into `dir`, each atomically.
void write_bundle(const std::filesystem::path& dir, const MatchResult& result);

/// File-system safe version of a match id.
std::string sanitize_id(const std::string& id);

struct SeasonRunOptions {
  int workers = 1;
  /// Fail when more than this fraction of matches fails.
  double max_failure_fraction = 0.05;
  std::function<void(const std::string&)> log;
};

struct SeasonRun {
  std::vector<MatchEtiRecord> records;
  std::vector<std::string> failed;
  int cache_hits = 0;
  int computed = 0;
  bool exceeds_failure_threshold = false;
};

/// Fits every match on a bounded worker pool. Results are cached under
/// `out_dir/cache/<match>-<config hash>.json` and bundles written to
/// `out_dir/matches/<match>/`; cached matches are not recomputed.
/// Records of successful matches come back in input order; failures are
/// logged and listed, and `exceeds_failure_threshold` tells the caller
/// whether the run as a whole should be treated as failed.
SeasonRun run_season(const std::vector<ScoreSeries>& matches,
                     const PipelineConfig& config,
                     const std::filesystem::path& out_dir,
                     const SeasonRunOptions& opts = {});

/// Writes season_eti.csv, team_table.csv and clusters.json. Team tables
/// and clusters are skipped (with a log line) when teams have too few
/// matches. Returns the names of the files written.
std::vector<std::string> write_season_outputs(
    const std::filesystem::path& out_dir,
    const std::vector<MatchEtiRecord>& records, int c_max,
    const std::function<void(const std::string&)>& log = {});

}  // namespace scoretrend
