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


#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli.hpp"
#include "scoretrend/indices.hpp"
#include "scoretrend/io.hpp"
#include "scoretrend/posterior.hpp"
#include "scoretrend/season.hpp"

namespace scoretrend {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Random basket sequence for one match, written as play-by-play rows.
void append_match(std::ostream& os, const std::string& id,
                  const std::string& home, const std::string& away,
                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(2.2);
  std::discrete_distribution<int> points({30, 45, 25});
  double t = 0.0;
  int h = 0, a = 0;
  double lean = 0.0;
  std::normal_distribution<double> drift(0.0, 0.15);
  while (true) {
    t += gap(rng);
    if (t > 48.0) break;
    lean = std::clamp(lean + drift(rng), -0.8, 0.8);
    const bool home_scores = std::uniform_real_distribution<double>(-1, 1)(rng) > lean;
    (home_scores ? h : a) += points(rng) + 1;
    os << id << ",2020-02-0" << (seed % 9 + 1) << ',' << home << ',' << away
       << ',' << t << ',' << h << ',' << a << '\n';
  }
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("scoretrend_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kHeader = "match_id,date,home_team,away_team,minute,home_score,away_score\n";

fs::path write_single(const fs::path& dir, std::uint64_t seed) {
  std::ofstream f(dir / "match.csv");
  f << kHeader;
  append_match(f, "g" + std::to_string(seed), "HOME", "AWAY", seed);
  return dir / "match.csv";
}

std::vector<std::string> quick(std::vector<std::string> args) {
  for (const char* a : {"--chains", "2", "--iters", "300"}) args.emplace_back(a);
  return args;
}

TEST(Cli, HelpDocumentsConfigFields) {
  const auto r = run({"fit", "--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* field : {"grid_points", "domain_end", "prior_scale", "prior_df",
                            "n_chains", "n_iter", "warmup_frac", "target_accept",
                            "thin", "mle_starts", "mle_max_iter",
                            "max_summary_draws", "seed", "--workers", "--config"}) {
    EXPECT_NE(r.out.find(field), std::string::npos) << field;
  }
}

TEST(Cli, UnknownFlagIsAnError) {
  const auto dir = scratch("unknown");
  const auto csv = write_single(dir, 1);
  const auto r = run({"fit", "--input", csv.string(), "--out", (dir / "b").string(),
                      "--bogus", "1"});
  EXPECT_EQ(r.code, 2);
  const auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j["error"], "InvalidInput");
  EXPECT_EQ(run({}).code, 2);
  fs::remove_all(dir);
}

TEST(Cli, InputErrorsGiveExitTwo) {
  const auto dir = scratch("badinput");
  {
    std::ofstream f(dir / "bad.csv");
    f << kHeader << "x,2020-01-01,A,B,1.0,4,0\nx,2020-01-01,A,B,2.0,2,0\n";
  }
  const auto r = run({"fit", "--input", (dir / "bad.csv").string(), "--out",
                      (dir / "b").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(nlohmann::json::parse(r.err)["error"], "NonMonotoneScores");
  const auto m = run({"plotdata", "--input", (dir / "nothing").string()});
  EXPECT_EQ(m.code, 2);
  EXPECT_EQ(nlohmann::json::parse(m.err)["error"], "MissingBundle");
  fs::remove_all(dir);
}

TEST(Cli, FitGridAndDeterminism) {
  const auto dir = scratch("fit");
  const auto csv = write_single(dir, 2);
  const auto a = run(quick({"fit", "--input", csv.string(), "--out",
                            (dir / "a").string(), "--grid-points", "3",
                            "--seed", "7"}));
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = run(quick({"fit", "--input", csv.string(), "--out",
                            (dir / "b").string(), "--grid-points", "3",
                            "--seed", "7"}));
  ASSERT_EQ(b.code, 0) << b.err;
  const auto summary = summary_from_json(read_file(dir / "a" / "indices.json"));
  EXPECT_EQ(summary.grid, (std::vector<double>{0.0, 24.0, 48.0}));
  EXPECT_EQ(read_file(dir / "a" / "chain.csv"), read_file(dir / "b" / "chain.csv"));
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_EQ(j["eti_median"].get<double>(), summary.eti_median);
  fs::remove_all(dir);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  const auto dir = scratch("config");
  const auto csv = write_single(dir, 3);
  {
    std::ofstream f(dir / "cfg.json");
    f << R"({"grid_points": 11, "n_iter": 200, "n_chains": 2, "thin": 2})";
  }
  const auto r = run({"fit", "--input", csv.string(), "--out", (dir / "b").string(),
                      "--config", (dir / "cfg.json").string(), "--grid-points", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = summary_from_json(read_file(dir / "b" / "indices.json"));
  EXPECT_EQ(s.grid.size(), 5u);
  const auto mle = nlohmann::json::parse(read_file(dir / "b" / "mle.json"));
  EXPECT_EQ(mle["mcmc"]["n_iter"], 200);
  EXPECT_EQ(mle["mcmc"]["thin"], 2);
  fs::remove_all(dir);
}

TEST(Cli, PlotdataRowsBoundsAndRoundTrip) {
  const auto dir = scratch("plot");
  const auto csv = write_single(dir, 4);
  ASSERT_EQ(run(quick({"fit", "--input", csv.string(), "--out",
                       (dir / "b").string()})).code, 0);
  const auto r = run({"plotdata", "--input", (dir / "b").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line,
            "t,mu_d,cred_lo,cred_hi,pred_lo,pred_hi,tdi_mean,tdi_q05,tdi_q50,"
            "tdi_q95,deti_q50");
  const auto m = moments_from_json(read_file(dir / "b" / "posterior_mle.json"));
  const auto s = summary_from_json(read_file(dir / "b" / "indices.json"));
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::vector<double> v;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 11u);
    EXPECT_LE(v[2], v[1]);
    EXPECT_LE(v[1], v[3]);
    EXPECT_LE(v[4], v[2]);
    EXPECT_GE(v[5], v[3]);
    EXPECT_LE(v[7], v[8]);
    EXPECT_LE(v[8], v[9]);
    const auto k = static_cast<Eigen::Index>(rows);
    EXPECT_NEAR(v[0], m.grid[rows], 1e-12);
    EXPECT_NEAR(v[1], m.mu_d(k), 1e-12);
    EXPECT_NEAR(v[6], s.tdi_mean[rows], 1e-12);
    EXPECT_NEAR(v[10], s.deti_q50[rows], 1e-12);
    ++rows;
  }
  EXPECT_EQ(rows, 241u);
  ASSERT_EQ(run({"plotdata", "--input", (dir / "b").string(), "--out",
                 (dir / "p.csv").string()}).code, 0);
  EXPECT_EQ(read_file(dir / "p.csv"), r.out);
  fs::remove_all(dir);
}

TEST(Cli, RealTimePrefix) {
  const auto dir = scratch("prefix");
  const auto csv = write_single(dir, 5);
  const auto r = run(quick({"fit", "--input", csv.string(), "--out",
                            (dir / "b").string(), "--until", "24"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto series = series_from_json(read_file(dir / "b" / "series.json"));
  EXPECT_LE(series.times.back(), 24.0);
  EXPECT_EQ(summary_from_json(read_file(dir / "b" / "indices.json")).grid.back(), 48.0);
  fs::remove_all(dir);
}

TEST(Cli, SeasonAndCache) {
  const auto dir = scratch("season");
  fs::create_directories(dir / "in");
  const std::vector<std::array<const char*, 3>> games = {
      {"s1", "A", "B"}, {"s2", "B", "C"}, {"s3", "C", "A"}};
  std::uint64_t seed = 10;
  for (const auto& g : games) {
    std::ofstream f(dir / "in" / (std::string(g[0]) + ".csv"));
    f << kHeader;
    append_match(f, g[0], g[1], g[2], seed++);
  }
  const auto args = quick({"season", "--input", (dir / "in").string(), "--out",
                           (dir / "out").string(), "--workers", "2"});
  const auto first = run(args);
  ASSERT_EQ(first.code, 0) << first.err;
  const auto rows = read_season_eti_csv(read_file(dir / "out" / "season_eti.csv"));
  EXPECT_EQ(rows.size(), 3u);
  EXPECT_TRUE(fs::exists(dir / "out" / "team_table.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "clusters.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "matches" / "s2" / "chain.csv"));

  const auto second = run(args);
  ASSERT_EQ(second.code, 0);
  const auto j = nlohmann::json::parse(second.out);
  EXPECT_EQ(j["cache_hits"], 3);
  EXPECT_EQ(j["computed"], 0);
  EXPECT_NE(second.err.find("cache hit: s1"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, SeasonFailureThreshold) {
  const auto dir = scratch("seasonfail");
  {
    std::ofstream f(dir / "all.csv");
    f << kHeader;
    append_match(f, "ok", "A", "B", 20);
    f << "late,2020-01-01,A,B,50.0,2,0\n";
  }
  const auto r = run(quick({"season", "--input", (dir / "all.csv").string(),
                            "--out", (dir / "out").string()}));
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("SeasonFailureThreshold"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "season_eti.csv"));
  fs::remove_all(dir);
}

TEST(Cli, Validate) {
  const auto dir = scratch("validate");
  {
    std::ofstream f(dir / "v.csv");
    f << kHeader << "v,2020-01-01,A,B,1.0,2,0\nv,2020-01-01,A,B,1.0,2,2\n";
  }
  const auto r = run({"validate", "--input", (dir / "v.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["events"], 2);
  EXPECT_GE(j[0]["warnings"].size(), 2u);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace scoretrend
