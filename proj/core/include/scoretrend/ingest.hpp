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

#include <cstddef>
#include <istream>
#include <span>
#include <string>
#include <vector>

namespace scoretrend {

inline constexpr double kDefaultDomainEnd = 48.0;

/// One record of a play-by-play table. `minute` is minutes elapsed since
/// tip-off; converting period/clock readings is up to the caller.
struct PlayRow {
  std::string match_id;
  std::string date;
  std::string home_team;
  std::string away_team;
  double minute = 0.0;
  double home_score = 0.0;
  double away_score = 0.0;
};

/// Running away-minus-home score difference of a single match.
///
/// `times` are sorted non-decreasing and lie in (0, domain_end]; `diffs`
/// holds the difference recorded after each scoring event.
struct ScoreSeries {
  std::string match_id;
  std::string date;
  std::string home_team;
  std::string away_team;
  std::vector<double> times;
  std::vector<double> diffs;
  double domain_end = kDefaultDomainEnd;

  std::size_t size() const { return times.size(); }

  friend bool operator==(const ScoreSeries&, const ScoreSeries&) = default;
};

/// Builds a series from the rows of one match. Rows past `domain_end`
/// (overtime) and tip-off markers at minute 0 are dropped; the remaining
/// rows are stably sorted by minute.
///
/// Throws Error{kInvalidInput} on empty input, mixed match ids or a
/// negative/non-finite minute, Error{kNonMonotoneScores} when a cumulative
/// score decreases, Error{kEmptyAfterTruncation} when nothing survives the
/// domain cut.
ScoreSeries parse_play_by_play(std::span<const PlayRow> rows,
                               double domain_end = kDefaultDomainEnd);

/// Reads the play-by-play CSV format
/// `match_id,date,home_team,away_team,minute,home_score,away_score`.
std::vector<PlayRow> read_play_by_play_csv(std::istream& in);
std::vector<PlayRow> read_play_by_play_csv(const std::string& path);

/// Writes rows back out in the same CSV format.
void write_play_by_play_csv(std::ostream& out, std::span<const PlayRow> rows);

/// Groups rows by match id (first-seen order) and parses each group.
std::vector<ScoreSeries> parse_matches(std::span<const PlayRow> rows,
                                       double domain_end = kDefaultDomainEnd);

/// Non-fatal data quality checks. Never mutates the series.
std::vector<std::string> validate_series(const ScoreSeries& s);

/// Canonical JSON form
/// `{match_id, home_team, away_team, domain_end, events:[{t, d}]}`
/// (plus `date` when non-empty).
std::string series_to_json(const ScoreSeries& s);
ScoreSeries series_from_json(const std::string& text);

}  // namespace scoretrend
