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

#include "scoretrend/season.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

#include <boost/tokenizer.hpp>
#include <json.hpp>

#include "scoretrend/error.hpp"
#include "scoretrend/indices.hpp"

namespace scoretrend {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Order-independent view of the records so aggregated floating-point sums
// do not depend on input order.
std::vector<MatchEtiRecord> canonical(std::span<const MatchEtiRecord> records) {
  std::vector<MatchEtiRecord> out(records.begin(), records.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.match_id, a.date, a.home_team, a.away_team,
                    a.eti_median) < std::tie(b.match_id, b.date, b.home_team,
                                             b.away_team, b.eti_median);
  });
  return out;
}

double grand_mean(std::span<const MatchEtiRecord> records) {
  double acc = 0.0;
  for (const auto& r : records) acc += r.eti_median;
  return records.empty() ? 0.0 : acc / static_cast<double>(records.size());
}

struct Moments {
  double n = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double y) {
    n += 1.0;
    sum += y;
    sum_sq += y * y;
  }
  Moments& operator+=(const Moments& o) {
    n += o.n;
    sum += o.sum;
    sum_sq += o.sum_sq;
    return *this;
  }
  // Sum of squared leave-one-out residuals y_i - mean_{-i}, which equal
  // n (y_i - mean) / (n - 1).
  double loo_sse() const {
    if (n < 2.0) return kInf;
    const double centered = std::max(sum_sq - sum * sum / n, 0.0);
    return centered * n * n / ((n - 1.0) * (n - 1.0));
  }
  double rss() const {
    if (n < 1.0) return 0.0;
    return std::max(sum_sq - sum * sum / n, 0.0);
  }
};

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\\") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

}  // namespace

SeasonStats season_stats(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(ErrorCode::kInsufficientData,
                "season statistics need at least two values");
  }
  SeasonStats s;
  s.n = values.size();
  const double n = static_cast<double>(s.n);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double m2 = 0.0;
  double m3 = 0.0;
  for (double x : values) {
    const double d = x - s.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  s.sd = std::sqrt(m2 / (n - 1.0));
  m2 /= n;
  m3 /= n;
  if (s.n >= 3 && m2 > 0.0) {
    const double g1 = m3 / std::pow(m2, 1.5);
    s.skewness = g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
  }
  std::vector<double> v(values.begin(), values.end());
  s.median = quantile(v, 0.5);
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

SeasonStats season_stats(std::span<const MatchEtiRecord> records) {
  std::vector<double> v;
  v.reserve(records.size());
  for (const auto& r : records) v.push_back(r.eti_median);
  return season_stats(v);
}

std::vector<TeamSummary> team_table(std::span<const MatchEtiRecord> records) {
  const auto recs = canonical(records);
  std::map<std::string, std::vector<double>> per_team;
  for (const auto& r : recs) {
    if (!(r.eti_median >= 0.0)) {
      throw Error(ErrorCode::kInvalidInput,
                  "match " + r.match_id + ": negative or NaN ETI");
    }
    per_team[r.home_team].push_back(r.eti_median);
    if (r.away_team != r.home_team) per_team[r.away_team].push_back(r.eti_median);
  }
  std::vector<TeamSummary> table;
  for (const auto& [team, values] : per_team) {
    if (values.size() < 2) {
      throw Error(ErrorCode::kInsufficientData,
                  "team " + team + " has fewer than two matches");
    }
    const auto st = season_stats(values);
    TeamSummary t;
    t.team = team;
    t.matches = values.size();
    t.average = st.mean;
    t.sd = st.sd;
    t.q025 = quantile(values, 0.025);
    t.q50 = st.median;
    t.q975 = quantile(values, 0.975);
    table.push_back(std::move(t));
  }
  std::sort(table.begin(), table.end(), [](const auto& a, const auto& b) {
    if (a.average != b.average) return a.average > b.average;
    return a.team < b.team;
  });
  return table;
}

double loo_rmsep(std::span<const double> outcomes,
                 std::span<const int> groups) {
  if (outcomes.empty() || outcomes.size() != groups.size()) {
    throw Error(ErrorCode::kInsufficientData,
                "outcomes and groups must be non-empty and of equal length");
  }
  const double shift = std::accumulate(outcomes.begin(), outcomes.end(), 0.0) /
                       static_cast<double>(outcomes.size());
  std::map<int, Moments> by_group;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    by_group[groups[i]].add(outcomes[i] - shift);
  }
  double sse = 0.0;
  for (const auto& [g, m] : by_group) {
    const double part = m.loo_sse();
    if (!std::isfinite(part)) return kInf;
    sse += part;
  }
  return std::sqrt(sse / static_cast<double>(outcomes.size()));
}

double loo_rmsep(std::span<const MatchEtiRecord> records,
                 const TeamGroups& groups) {
  if (records.empty()) {
    throw Error(ErrorCode::kInsufficientData, "no records");
  }
  std::vector<double> y;
  std::vector<int> g;
  auto add = [&](const std::string& team, double value) {
    const auto it = groups.find(team);
    if (it == groups.end()) {
      throw Error(ErrorCode::kInvalidInput, "team " + team + " has no group");
    }
    y.push_back(value);
    g.push_back(it->second);
  };
  for (const auto& r : canonical(records)) {
    add(r.home_team, r.eti_median);
    add(r.away_team, r.eti_median);
  }
  return loo_rmsep(y, g);
}

TeamGroups groups_from_partition(const std::vector<std::string>& ranking,
                                 const Partition& partition) {
  TeamGroups out;
  int group = 0;
  std::size_t next_cut = 0;
  for (std::size_t rank = 0; rank < ranking.size(); ++rank) {
    while (next_cut < partition.cut_ranks.size() &&
           static_cast<std::size_t>(partition.cut_ranks[next_cut]) == rank) {
      ++group;
      ++next_cut;
    }
    out[ranking[rank]] = group;
  }
  return out;
}

std::string group_label(int group) {
  std::string out;
  int g = group;
  do {
    out.insert(out.begin(), static_cast<char>('A' + g % 26));
    g = g / 26 - 1;
  } while (g >= 0);
  return out;
}

ClusterResult cluster_teams(std::span<const MatchEtiRecord> records,
                            int c_max, double tol) {
  const auto recs = canonical(records);
  const auto table = team_table(recs);
  const int n = static_cast<int>(table.size());
  if (c_max < 1 || c_max > n) {
    throw Error(ErrorCode::kInvalidInput,
                "c_max must lie in [1, number of teams]");
  }

  ClusterResult result;
  std::map<std::string, int> rank_of;
  for (int i = 0; i < n; ++i) {
    result.ranking.push_back(table[static_cast<std::size_t>(i)].team);
    rank_of[table[static_cast<std::size_t>(i)].team] = i;
  }

  const double shift = grand_mean(recs);
  std::vector<Moments> team(static_cast<std::size_t>(n));
  double n_obs = 0.0;
  for (const auto& r : recs) {
    team[static_cast<std::size_t>(rank_of[r.home_team])].add(r.eti_median - shift);
    team[static_cast<std::size_t>(rank_of[r.away_team])].add(r.eti_median - shift);
    n_obs += 2.0;
  }

  auto score = [&](const std::vector<int>& cuts, double& rss) {
    double sse = 0.0;
    rss = 0.0;
    int start = 0;
    for (std::size_t g = 0; g <= cuts.size(); ++g) {
      const int stop = g < cuts.size() ? cuts[g] : n;
      Moments m;
      for (int t = start; t < stop; ++t) m += team[static_cast<std::size_t>(t)];
      rss += m.rss();
      sse += m.loo_sse();
      start = stop;
    }
    return std::isfinite(sse) ? std::sqrt(sse / n_obs) : kInf;
  };

  for (int c = 1; c <= c_max; ++c) {
    const int k = c - 1;
    std::vector<int> cuts(static_cast<std::size_t>(k));
    std::iota(cuts.begin(), cuts.end(), 1);
    Partition best{c, cuts, kInf};
    double best_rss = kInf;
    bool first = true;
    for (;;) {
      double rss = 0.0;
      const double value = score(cuts, rss);
      if (first || value < best.rmsep) {
        best.rmsep = value;
        best.cut_ranks = cuts;
        first = false;
      }
      best_rss = std::min(best_rss, rss);
      // Next combination of k cuts from {1, ..., n - 1}, lexicographic.
      int i = k - 1;
      while (i >= 0 && cuts[static_cast<std::size_t>(i)] == n - k + i) --i;
      if (i < 0) break;
      ++cuts[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j) {
        cuts[static_cast<std::size_t>(j)] = cuts[static_cast<std::size_t>(j - 1)] + 1;
      }
    }
    result.best.push_back(best);
    result.min_rss.push_back(best_rss);
  }

  result.selected_c = c_max;
  for (int c = 1; c < c_max; ++c) {
    const double here = result.best[static_cast<std::size_t>(c - 1)].rmsep;
    const double next = result.best[static_cast<std::size_t>(c)].rmsep;
    const bool improves = std::isfinite(next) &&
                          (!std::isfinite(here) || here - next >= tol);
    if (!improves) {
      result.selected_c = c;
      break;
    }
  }

  const auto groups = groups_from_partition(
      result.ranking, result.best[static_cast<std::size_t>(result.selected_c - 1)]);
  for (const auto& [name, g] : groups) result.labels[name] = group_label(g);
  return result;
}

void apply_labels(std::vector<TeamSummary>& table,
                  const ClusterResult& clusters) {
  for (auto& row : table) {
    const auto it = clusters.labels.find(row.team);
    row.group_label = it == clusters.labels.end() ? std::string{} : it->second;
  }
}

std::string season_eti_csv(std::span<const MatchEtiRecord> records) {
  std::ostringstream os;
  os << "match_id,date,home_team,away_team,eti_median\n";
  for (const auto& r : records) {
    os << csv_field(r.match_id) << ',' << csv_field(r.date) << ','
       << csv_field(r.home_team) << ',' << csv_field(r.away_team) << ','
       << format_real(r.eti_median) << '\n';
  }
  return os.str();
}

std::vector<MatchEtiRecord> read_season_eti_csv(const std::string& text) {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line.rfind("match_id,date,home_team,away_team,eti_median", 0) != 0) {
    throw Error(ErrorCode::kInvalidInput, "not a season ETI CSV");
  }
  std::vector<MatchEtiRecord> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Tokenizer tok(line);
    const std::vector<std::string> f(tok.begin(), tok.end());
    if (f.size() != 5) {
      throw Error(ErrorCode::kInvalidInput, "bad season ETI row: " + line);
    }
    out.push_back({f[0], f[1], f[2], f[3], std::stod(f[4])});
  }
  return out;
}

std::string team_table_csv(std::span<const TeamSummary> table) {
  std::ostringstream os;
  os << "team,matches,average,sd,q025,q50,q975,group\n";
  for (const auto& t : table) {
    os << csv_field(t.team) << ',' << t.matches << ',' << format_real(t.average)
       << ',' << format_real(t.sd) << ',' << format_real(t.q025) << ','
       << format_real(t.q50) << ',' << format_real(t.q975) << ','
       << t.group_label << '\n';
  }
  return os.str();
}

std::string clusters_json(const ClusterResult& clusters) {
  nlohmann::ordered_json j;
  j["ranking"] = clusters.ranking;
  j["selected_c"] = clusters.selected_c;
  auto per_c = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < clusters.best.size(); ++i) {
    const auto& p = clusters.best[i];
    nlohmann::ordered_json e;
    e["c"] = p.c;
    e["rmsep"] = std::isfinite(p.rmsep) ? nlohmann::ordered_json(p.rmsep)
                                        : nlohmann::ordered_json(nullptr);
    e["cut_ranks"] = p.cut_ranks;
    e["min_rss"] = clusters.min_rss[i];
    const auto groups = groups_from_partition(clusters.ranking, p);
    nlohmann::ordered_json labels;
    for (const auto& team : clusters.ranking) {
      labels[team] = group_label(groups.at(team));
    }
    e["labels"] = std::move(labels);
    per_c.push_back(std::move(e));
  }
  j["partitions"] = std::move(per_c);
  nlohmann::ordered_json labels;
  for (const auto& team : clusters.ranking) labels[team] = clusters.labels.at(team);
  j["labels"] = std::move(labels);
  return j.dump(2);
}

}  // namespace scoretrend
