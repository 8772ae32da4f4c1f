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

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "scoretrend/error.hpp"
#include "scoretrend/ingest.hpp"

namespace scoretrend {
namespace {

PlayRow row(double minute, double home, double away, std::string id = "m1") {
  return {std::move(id), "2020-10-11", "MIA", "LAL", minute, home, away};
}

TEST(ParsePlayByPlay, DiffIsAwayMinusHome) {
  const std::vector<PlayRow> rows = {row(0.5, 2, 0)};
  const auto s = parse_play_by_play(rows);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s.diffs[0], -2.0);
  EXPECT_EQ(s.home_team, "MIA");
  EXPECT_EQ(s.away_team, "LAL");
}

TEST(ParsePlayByPlay, DropsOvertime) {
  const std::vector<PlayRow> rows = {row(1.0, 2, 0), row(47.9, 100, 101),
                                     row(49.2, 100, 104)};
  const auto s = parse_play_by_play(rows);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s.times.back(), 47.9);
}

TEST(ParsePlayByPlay, SortedInputIsIdentity) {
  const std::vector<PlayRow> rows = {row(0.4, 0, 2), row(1.1, 3, 2),
                                     row(2.0, 3, 5), row(2.7, 5, 5)};
  const auto s = parse_play_by_play(rows);
  EXPECT_EQ(s.times, (std::vector<double>{0.4, 1.1, 2.0, 2.7}));
  EXPECT_EQ(s.diffs, (std::vector<double>{2, -1, 2, 0}));
}

TEST(ParsePlayByPlay, SortsAndKeepsTiesInInputOrder) {
  const std::vector<PlayRow> rows = {row(3.0, 4, 2), row(1.0, 2, 0),
                                     row(3.0, 5, 2), row(2.0, 2, 2)};
  const auto s = parse_play_by_play(rows);
  EXPECT_EQ(s.times, (std::vector<double>{1.0, 2.0, 3.0, 3.0}));
  EXPECT_EQ(s.diffs, (std::vector<double>{-2, 0, -2, -3}));
}

TEST(ParsePlayByPlay, Errors) {
  const std::vector<PlayRow> overtime_only = {row(48.5, 2, 0), row(50, 2, 3)};
  try {
    parse_play_by_play(overtime_only);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyAfterTruncation);
  }
  const std::vector<PlayRow> decreasing = {row(1.0, 4, 0), row(2.0, 2, 0)};
  try {
    parse_play_by_play(decreasing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonMonotoneScores);
  }
  const std::vector<PlayRow> negative = {row(-1.0, 0, 0)};
  EXPECT_THROW(parse_play_by_play(negative), Error);
  EXPECT_THROW(parse_play_by_play(std::span<const PlayRow>{}), Error);
}

TEST(ParsePlayByPlay, ConfigurableDomain) {
  const std::vector<PlayRow> rows = {row(10, 1, 0), row(70, 2, 0),
                                     row(95, 2, 1)};
  EXPECT_EQ(parse_play_by_play(rows, 90.0).size(), 2u);
}

TEST(ParsePlayByPlay, TruncationCommutesWithSorting) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> minute(0.01, 55.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> minutes;
    for (int i = 0; i < 30; ++i) minutes.push_back(minute(rng));
    std::sort(minutes.begin(), minutes.end());
    std::vector<PlayRow> sorted;
    double h = 0, a = 0;
    for (double m : minutes) {
      (rng() % 2 ? h : a) += 1 + rng() % 3;
      sorted.push_back(row(m, h, a));
    }
    std::vector<PlayRow> shuffled = sorted;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<PlayRow> truncated;
    for (const auto& r : shuffled) {
      if (r.minute <= 48.0) truncated.push_back(r);
    }
    EXPECT_EQ(parse_play_by_play(shuffled), parse_play_by_play(truncated));
    EXPECT_EQ(parse_play_by_play(sorted), parse_play_by_play(shuffled));
  }
}

TEST(ReadCsv, ParsesHeaderAndGroupsMatches) {
  std::istringstream in(
      "match_id,date,home_team,away_team,minute,home_score,away_score\n"
      "g1,2020-01-01,A,B,0.5,2,0\n"
      "g1,2020-01-01,A,B,1.0,2,3\n"
      "g2,2020-01-02,\"C, Inc\",D,0.7,0,2\n");
  const auto rows = read_play_by_play_csv(in);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2].home_team, "C, Inc");
  const auto matches = parse_matches(rows);
  ASSERT_EQ(matches.size(), 2u);
  EXPECT_EQ(matches[0].match_id, "g1");
  EXPECT_EQ(matches[0].diffs, (std::vector<double>{-2, 1}));
  EXPECT_EQ(matches[1].diffs, (std::vector<double>{2}));
}

TEST(ReadCsv, RejectsBadNumbersAndMissingColumns) {
  std::istringstream bad_number(
      "match_id,date,home_team,away_team,minute,home_score,away_score\n"
      "g1,2020-01-01,A,B,1;5,2,0\n");
  EXPECT_THROW(read_play_by_play_csv(bad_number), Error);
  std::istringstream missing("match_id,minute,home_score\n");
  EXPECT_THROW(read_play_by_play_csv(missing), Error);
}

TEST(ReadCsv, WriteReadRoundTrip) {
  std::vector<PlayRow> rows = {row(0.25, 0, 2, "a\\b,c"), row(1.5, 3, 2, "a\\b,c")};
  rows[1].home_team = "Quote \"Q\"";
  rows[0].home_team = rows[1].home_team;
  std::stringstream io;
  write_play_by_play_csv(io, rows);
  const auto back = read_play_by_play_csv(io);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].match_id, "a\\b,c");
  EXPECT_EQ(back[1].home_team, "Quote \"Q\"");
  EXPECT_EQ(back[1].minute, 1.5);
}

TEST(ValidateSeries, Warnings) {
  ScoreSeries s;
  s.times = {1.0, 12.0, 12.0};
  s.diffs = {2.0, 4.0, 1.0};
  const auto w = validate_series(s);
  auto has = [&](const std::string& needle) {
    return std::any_of(w.begin(), w.end(), [&](const std::string& x) {
      return x.find(needle) != std::string::npos;
    });
  };
  EXPECT_TRUE(has("duplicate timestamp"));
  EXPECT_TRUE(has("short series"));
  const ScoreSeries copy = s;
  EXPECT_EQ(copy, s);

  ScoreSeries typical;
  double d = 0.0;
  for (int i = 1; i <= 200; ++i) {
    typical.times.push_back(i * 0.2);
    d += (i % 2 ? 2.0 : -3.0);
    typical.diffs.push_back(d);
  }
  EXPECT_TRUE(validate_series(typical).empty());

  ScoreSeries blowout = typical;
  blowout.diffs.back() = 130.0;
  const auto bw = validate_series(blowout);
  EXPECT_TRUE(std::any_of(bw.begin(), bw.end(), [](const auto& x) {
    return x.find("exceeds 100") != std::string::npos;
  }));
}

TEST(SeriesJson, ParseSerializeParseIsIdempotent) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 48.0);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<PlayRow> rows;
    std::vector<double> minutes;
    for (int i = 0; i < 25; ++i) minutes.push_back(u(rng));
    std::sort(minutes.begin(), minutes.end());
    double h = 0, a = 0;
    for (double m : minutes) {
      (rng() % 2 ? h : a) += 2;
      rows.push_back(row(m, h, a, "rt"));
    }
    const auto first = parse_play_by_play(rows);
    const auto text = series_to_json(first);
    const auto second = series_from_json(text);
    EXPECT_EQ(first, second);
    EXPECT_EQ(series_to_json(second), text);
  }
}

TEST(SeriesJson, CanonicalShape) {
  ScoreSeries s;
  s.match_id = "x";
  s.home_team = "H";
  s.away_team = "A";
  s.times = {1.5};
  s.diffs = {-2};
  EXPECT_EQ(series_to_json(s),
            R"({"match_id":"x","home_team":"H","away_team":"A","domain_end":48.0,"events":[{"t":1.5,"d":-2.0}]})");
}

}  // namespace
}  // namespace scoretrend
