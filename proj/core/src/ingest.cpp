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

#include "scoretrend/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/tokenizer.hpp>
#include <json.hpp>

#include "scoretrend/error.hpp"

namespace scoretrend {
namespace {

using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;

std::vector<std::string> split_csv_line(const std::string& line) {
  Tokenizer tok(line);
  return {tok.begin(), tok.end()};
}

double parse_real(const std::string& field, const char* column,
                  std::size_t line_no) {
  std::string trimmed = field;
  trimmed.erase(0, trimmed.find_first_not_of(" \t"));
  trimmed.erase(trimmed.find_last_not_of(" \t\r") + 1);
  double value = 0.0;
  const auto* first = trimmed.data();
  const auto* last = trimmed.data() + trimmed.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || trimmed.empty()) {
    throw Error(ErrorCode::kInvalidInput,
                "line " + std::to_string(line_no) + ": cannot parse " +
                    column + " value '" + field + "'");
  }
  return value;
}

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string quote_if_needed(const std::string& field) {
  if (field.find_first_of(",\"\n\\") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

ScoreSeries parse_play_by_play(std::span<const PlayRow> rows,
                               double domain_end) {
  if (rows.empty()) {
    throw Error(ErrorCode::kInvalidInput, "no rows for match");
  }
  if (!(domain_end > 0.0) || !std::isfinite(domain_end)) {
    throw Error(ErrorCode::kInvalidInput, "domain_end must be positive");
  }
  const std::string& id = rows.front().match_id;
  for (const auto& r : rows) {
    if (r.match_id != id) {
      throw Error(ErrorCode::kInvalidInput,
                  "rows from several matches passed together: '" + id +
                      "' and '" + r.match_id + "'");
    }
    if (!std::isfinite(r.minute) || r.minute < 0.0) {
      throw Error(ErrorCode::kInvalidInput,
                  "match " + id + ": minute must be a non-negative real");
    }
  }

  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return rows[a].minute < rows[b].minute;
  });

  // Cumulative scores are checked over the full record set, overtime
  // included, before anything is dropped.
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto& prev = rows[order[k - 1]];
    const auto& cur = rows[order[k]];
    if (cur.home_score < prev.home_score || cur.away_score < prev.away_score) {
      throw Error(ErrorCode::kNonMonotoneScores,
                  "match " + id + ": cumulative score decreases at minute " +
                      format_real(cur.minute));
    }
  }

  ScoreSeries s;
  s.match_id = id;
  s.date = rows.front().date;
  s.home_team = rows.front().home_team;
  s.away_team = rows.front().away_team;
  s.domain_end = domain_end;
  for (auto idx : order) {
    const auto& r = rows[idx];
    if (r.minute <= 0.0 || r.minute > domain_end) continue;
    s.times.push_back(r.minute);
    s.diffs.push_back(r.away_score - r.home_score);
  }
  if (s.times.empty()) {
    throw Error(ErrorCode::kEmptyAfterTruncation,
                "match " + id + ": no scoring events inside (0, " +
                    format_real(domain_end) + "]");
  }
  return s;
}

std::vector<PlayRow> read_play_by_play_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kInvalidInput, "empty CSV input");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // Strip a UTF-8 byte order mark.
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);

  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"match_id", "minute", "home_score",
                               "away_score"}) {
    if (!col.contains(required)) {
      throw Error(ErrorCode::kInvalidInput,
                  std::string("CSV header lacks column '") + required + "'");
    }
  }
  auto optional_field = [&](const std::vector<std::string>& f,
                            const char* name) -> std::string {
    auto it = col.find(name);
    if (it == col.end() || it->second >= f.size()) return {};
    return f[it->second];
  };

  std::vector<PlayRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> f;
    try {
      f = split_csv_line(line);
    } catch (const boost::escaped_list_error& e) {
      throw Error(ErrorCode::kInvalidInput,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (f.size() < header.size()) {
      throw Error(ErrorCode::kInvalidInput,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields");
    }
    PlayRow r;
    r.match_id = f[col["match_id"]];
    r.date = optional_field(f, "date");
    r.home_team = optional_field(f, "home_team");
    r.away_team = optional_field(f, "away_team");
    r.minute = parse_real(f[col["minute"]], "minute", line_no);
    r.home_score = parse_real(f[col["home_score"]], "home_score", line_no);
    r.away_score = parse_real(f[col["away_score"]], "away_score", line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<PlayRow> read_play_by_play_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kInvalidInput, "cannot open " + path);
  }
  return read_play_by_play_csv(in);
}

void write_play_by_play_csv(std::ostream& out, std::span<const PlayRow> rows) {
  out << "match_id,date,home_team,away_team,minute,home_score,away_score\n";
  for (const auto& r : rows) {
    out << quote_if_needed(r.match_id) << ',' << quote_if_needed(r.date) << ','
        << quote_if_needed(r.home_team) << ',' << quote_if_needed(r.away_team)
        << ',' << format_real(r.minute) << ',' << format_real(r.home_score)
        << ',' << format_real(r.away_score) << '\n';
  }
}

std::vector<ScoreSeries> parse_matches(std::span<const PlayRow> rows,
                                       double domain_end) {
  std::vector<std::string> ids;
  std::map<std::string, std::vector<PlayRow>> groups;
  for (const auto& r : rows) {
    auto [it, inserted] = groups.try_emplace(r.match_id);
    if (inserted) ids.push_back(r.match_id);
    it->second.push_back(r);
  }
  std::vector<ScoreSeries> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    out.push_back(parse_play_by_play(groups[id], domain_end));
  }
  return out;
}

std::vector<std::string> validate_series(const ScoreSeries& s) {
  std::vector<std::string> warnings;
  if (s.times.size() != s.diffs.size()) {
    warnings.push_back("length mismatch between times and diffs");
    return warnings;
  }
  if (s.size() < 10) {
    warnings.push_back("short series: " + std::to_string(s.size()) +
                       " events");
  }
  std::size_t duplicates = 0;
  std::size_t unchanged = 0;
  bool unsorted = false;
  bool out_of_domain = false;
  double max_abs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    max_abs = std::max(max_abs, std::abs(s.diffs[i]));
    if (s.times[i] <= 0.0 || s.times[i] > s.domain_end) out_of_domain = true;
    if (i == 0) continue;
    if (s.times[i] == s.times[i - 1]) ++duplicates;
    if (s.times[i] < s.times[i - 1]) unsorted = true;
    if (s.diffs[i] == s.diffs[i - 1]) ++unchanged;
  }
  if (duplicates > 0) {
    warnings.push_back("duplicate timestamp: " + std::to_string(duplicates) +
                       " events share a time with their predecessor");
  }
  if (unchanged > 0) {
    warnings.push_back("unchanged difference: " + std::to_string(unchanged) +
                       " consecutive events leave the difference unchanged");
  }
  if (unsorted) warnings.push_back("times not sorted");
  if (out_of_domain) warnings.push_back("times outside (0, domain_end]");
  if (max_abs > 100.0) {
    warnings.push_back("max |diff| exceeds 100: " + format_real(max_abs));
  }
  return warnings;
}

std::string series_to_json(const ScoreSeries& s) {
  nlohmann::ordered_json j;
  j["match_id"] = s.match_id;
  if (!s.date.empty()) j["date"] = s.date;
  j["home_team"] = s.home_team;
  j["away_team"] = s.away_team;
  j["domain_end"] = s.domain_end;
  auto events = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    events.push_back({{"t", s.times[i]}, {"d", s.diffs[i]}});
  }
  j["events"] = std::move(events);
  return j.dump();
}

ScoreSeries series_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ScoreSeries s;
    s.match_id = j.at("match_id").get<std::string>();
    s.date = j.value("date", std::string{});
    s.home_team = j.at("home_team").get<std::string>();
    s.away_team = j.at("away_team").get<std::string>();
    s.domain_end = j.at("domain_end").get<double>();
    for (const auto& e : j.at("events")) {
      s.times.push_back(e.at("t").get<double>());
      s.diffs.push_back(e.at("d").get<double>());
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput,
                std::string("bad series JSON: ") + e.what());
  }
}

}  // namespace scoretrend
