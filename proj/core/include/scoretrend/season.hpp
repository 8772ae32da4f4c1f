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

#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace scoretrend {

/// Median posterior ETI of one match.
struct MatchEtiRecord {
  std::string match_id;
  std::string date;
  std::string home_team;
  std::string away_team;
  double eti_median = 0.0;
};

struct SeasonStats {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;  // n - 1 denominator
  /// Adjusted Fisher-Pearson coefficient G1; 0 for constant data or n < 3.
  double skewness = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Throws Error{kInsufficientData} for fewer than two values.
SeasonStats season_stats(std::span<const double> values);
SeasonStats season_stats(std::span<const MatchEtiRecord> records);

struct TeamSummary {
  std::string team;
  std::size_t matches = 0;
  double average = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q50 = 0.0;
  double q975 = 0.0;
  std::string group_label;
};

/// Per-team summaries of the median ETIs of the matches each team played,
/// sorted by average (descending), ties by team name. Throws
/// Error{kInsufficientData} if a team has fewer than two matches.
std::vector<TeamSummary> team_table(std::span<const MatchEtiRecord> records);

/// Contiguous partition of the ranked teams. `cut_ranks` holds the rank
/// index at which each group after the first starts.
struct Partition {
  int c = 1;
  std::vector<int> cut_ranks;
  double rmsep = 0.0;
};

/// Group of each team, by name.
using TeamGroups = std::map<std::string, int>;

/// Leave-one-out RMSEP of the group-mean model over observations with
/// group ids. The LOO prediction of an observation is its group mean
/// without it; a group holding a single observation scores +inf.
double loo_rmsep(std::span<const double> outcomes, std::span<const int> groups);

/// Every match contributes one observation per participating team,
/// assigned to that team's group.
double loo_rmsep(std::span<const MatchEtiRecord> records,
                 const TeamGroups& groups);

/// Maps a partition of `ranking` to team groups 0..c-1.
TeamGroups groups_from_partition(const std::vector<std::string>& ranking,
                                 const Partition& partition);

/// "A", "B", ..., "Z", "AA", ...
std::string group_label(int group);

struct ClusterResult {
  /// Teams ordered by season-average ETI, highest first.
  std::vector<std::string> ranking;
  /// Best partition for c = 1..c_max (index c - 1).
  std::vector<Partition> best;
  /// Minimum in-sample residual sum of squares over partitions, per c.
  std::vector<double> min_rss;
  int selected_c = 1;
  std::map<std::string, std::string> labels;
};

/// Exhaustive search over contiguous cut placements for c = 1..c_max.
/// Ties go to the lexicographically smallest cut vector. The selected c is
/// the smallest c whose successor improves RMSEP by less than `tol`.
ClusterResult cluster_teams(std::span<const MatchEtiRecord> records,
                            int c_max, double tol = 1e-3);

void apply_labels(std::vector<TeamSummary>& table,
                  const ClusterResult& clusters);

/// CSV / JSON writers for the season outputs.
std::string season_eti_csv(std::span<const MatchEtiRecord> records);
std::vector<MatchEtiRecord> read_season_eti_csv(const std::string& text);
std::string team_table_csv(std::span<const TeamSummary> table);
std::string clusters_json(const ClusterResult& clusters);

}  // namespace scoretrend
