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


#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scoretrend/error.hpp"
#include "scoretrend/indices.hpp"
#include "scoretrend/io.hpp"
#include "scoretrend/pipeline.hpp"

namespace scoretrend::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kConfigHelp =
    "Config file (--config) is a JSON object; any subset of:\n"
    "  grid_points        evaluation grid size on [0, domain_end] (241)\n"
    "  domain_end         regulation length in minutes (48)\n"
    "  prior_scale        T prior scale around the MLE (5)\n"
    "  prior_df           T prior degrees of freedom (4)\n"
    "  n_chains           MCMC chains (4)\n"
    "  n_iter             iterations per chain, warm-up included (5000)\n"
    "  warmup_frac        warm-up fraction (0.5)\n"
    "  target_accept      Metropolis acceptance target (0.3)\n"
    "  thin               keep every thin-th post-warm-up draw (1)\n"
    "  mle_starts         optimizer starts (8)\n"
    "  mle_max_iter       optimizer iterations per start (400)\n"
    "  max_summary_draws  draws used for index summaries (500)\n"
    "  seed               top-level seed (1)\n"
    "Flags override the file.";

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid_points;
  std::optional<int> chains;
  std::optional<int> iters;
  std::optional<double> prior_scale;
  int workers = 1;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Top-level seed");
  cmd->add_option("--grid-points", o.grid_points, "Grid size")
      ->check(CLI::Range(2, 1000000));
  cmd->add_option("--chains", o.chains, "MCMC chains")->check(CLI::Range(1, 64));
  cmd->add_option("--iters", o.iters, "Iterations per chain")
      ->check(CLI::Range(2, 100000000));
  cmd->add_option("--prior-scale", o.prior_scale, "Prior scale")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--workers", o.workers, "Worker threads")
      ->check(CLI::Range(1, 1024));
}

PipelineConfig resolve(const Overrides& o) {
  PipelineConfig c;
  if (!o.config.empty()) c = PipelineConfig::from_json(read_file(o.config));
  if (o.seed) c.seed = *o.seed;
  if (o.grid_points) c.grid_points = *o.grid_points;
  if (o.chains) c.mcmc.n_chains = *o.chains;
  if (o.iters) c.mcmc.n_iter = *o.iters;
  if (o.prior_scale) c.prior_scale = *o.prior_scale;
  if (c.grid_points < 2 || c.mcmc.n_chains < 1 || c.mcmc.n_iter < 2 ||
      !(c.prior_scale > 0.0) || !(c.prior_df > 0.0) ||
      !(c.mcmc.warmup_frac >= 0.0 && c.mcmc.warmup_frac < 1.0) ||
      c.mcmc.thin < 1 || c.mle.starts < 1 || c.summary.max_draws < 1 ||
      !(c.domain_end > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "config out of range: " + c.to_json());
  }
  return c;
}

std::vector<PlayRow> read_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidInput, "cannot open " + path.string());
  return read_play_by_play_csv(in);
}

std::vector<fs::path> csv_files(const fs::path& input) {
  std::vector<fs::path> files;
  if (fs::is_directory(input)) {
    for (const auto& e : fs::directory_iterator(input)) {
      if (e.is_regular_file() && e.path().extension() == ".csv") {
        files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(input);
  }
  return files;
}

// Rows grouped by match id, in first-seen order across files.
std::vector<std::vector<PlayRow>> read_match_rows(const fs::path& input) {
  std::vector<std::vector<PlayRow>> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& f : csv_files(input)) {
    for (auto& r : read_rows(f)) {
      const auto [it, fresh] = index.try_emplace(r.match_id, groups.size());
      if (fresh) groups.emplace_back();
      groups[it->second].push_back(std::move(r));
    }
  }
  if (groups.empty()) throw Error(ErrorCode::kInvalidInput, "no matches in input");
  return groups;
}

ScoreSeries select_match(const fs::path& input, const std::string& match_id,
                         double domain_end) {
  if (input.extension() == ".json") return series_from_json(read_file(input));
  auto rows = read_rows(input);
  if (!match_id.empty()) {
    std::erase_if(rows, [&](const PlayRow& r) { return r.match_id != match_id; });
    if (rows.empty()) {
      throw Error(ErrorCode::kInvalidInput, "match " + match_id + " not in input");
    }
  }
  auto matches = parse_matches(rows, domain_end);
  if (matches.size() != 1) {
    throw Error(ErrorCode::kInvalidInput,
                "input holds " + std::to_string(matches.size()) +
                    " matches; choose one with --match");
  }
  return matches.front();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnsupportedOrder:
    case ErrorCode::kFactorizationFailure:
    case ErrorCode::kOptimizerDiverged:
    case ErrorCode::kChainDiverged:
    case ErrorCode::kDegenerateCorrelation:
      return kNumericalFailure;
    case ErrorCode::kSeasonFailureThreshold:
      return kSeasonFailure;
    default:
      return kInputError;
  }
}

void report(std::ostream& err, std::string_view code,
            const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = std::string(code);
  j["message"] = message;
  err << j.dump() << '\n';
}

int cmd_fit(const fs::path& input, const std::string& match_id,
            std::optional<double> until, const fs::path& out_dir,
            const Overrides& o, std::ostream& out, std::ostream& err) {
  auto config = resolve(o);
  config.summary.workers = o.workers;
  config.mcmc.workers = o.workers;
  auto series = select_match(input, match_id, config.domain_end);
  if (until) {
    // Real-time use: keep only the events observed so far.
    std::vector<double> t, d;
    for (std::size_t i = 0; i < series.size(); ++i) {
      if (series.times[i] <= *until) {
        t.push_back(series.times[i]);
        d.push_back(series.diffs[i]);
      }
    }
    if (t.empty()) {
      throw Error(ErrorCode::kEmptyAfterTruncation,
                  "no events at or before minute " + fmt(*until));
    }
    series.times = std::move(t);
    series.diffs = std::move(d);
  }
  const auto result = fit_match(series, config);
  write_bundle(out_dir, result);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  nlohmann::ordered_json j;
  j["match_id"] = series.match_id;
  j["events"] = series.size();
  j["eti_median"] = result.summary.eti_median;
  j["eti_q025"] = result.summary.eti_q025;
  j["eti_q975"] = result.summary.eti_q975;
  j["bundle"] = out_dir.string();
  out << j.dump() << '\n';
  return kOk;
}

int cmd_season(const fs::path& input, const fs::path& out_dir, int c_max,
               const Overrides& o, std::ostream& out, std::ostream& err) {
  const auto config = resolve(o);
  std::vector<ScoreSeries> matches;
  std::vector<std::string> failed;
  const auto groups = read_match_rows(input);
  for (const auto& rows : groups) {
    try {
      matches.push_back(parse_play_by_play(rows, config.domain_end));
    } catch (const Error& e) {
      failed.push_back(rows.front().match_id);
      err << "failed " << rows.front().match_id << ": " << e.what() << '\n';
    }
  }
  SeasonRunOptions opts;
  opts.workers = o.workers;
  opts.log = [&](const std::string& line) { err << line << '\n'; };
  fs::create_directories(out_dir);
  SeasonRun run;
  if (!matches.empty()) run = run_season(matches, config, out_dir, opts);
  failed.insert(failed.end(), run.failed.begin(), run.failed.end());
  std::vector<std::string> written;
  if (!run.records.empty()) {
    written = write_season_outputs(out_dir, run.records, c_max, opts.log);
  }
  nlohmann::ordered_json j;
  j["matches"] = groups.size();
  j["computed"] = run.computed;
  j["cache_hits"] = run.cache_hits;
  j["failed"] = failed;
  j["outputs"] = written;
  out << j.dump() << '\n';
  const double limit = opts.max_failure_fraction * static_cast<double>(groups.size());
  if (static_cast<double>(failed.size()) > limit) {
    report(err, to_string(ErrorCode::kSeasonFailureThreshold),
           std::to_string(failed.size()) + " of " +
               std::to_string(groups.size()) + " matches failed");
    return kSeasonFailure;
  }
  return kOk;
}

int cmd_plotdata(const fs::path& bundle, const std::string& out_path,
                 std::ostream& out) {
  const auto moments_file = bundle / "posterior_mle.json";
  const auto indices_file = bundle / "indices.json";
  for (const auto& f : {moments_file, indices_file}) {
    if (!fs::exists(f)) {
      throw Error(ErrorCode::kMissingBundle, "missing " + f.string());
    }
  }
  const auto m = moments_from_json(read_file(moments_file));
  const auto s = summary_from_json(read_file(indices_file));
  if (m.grid.size() != s.grid.size()) {
    throw Error(ErrorCode::kMissingBundle, "bundle grids disagree");
  }
  constexpr double z = 1.959963984540054;  // 97.5% normal quantile
  const Eigen::VectorXd pred = m.predictive_var();
  std::ostringstream os;
  os << "t,mu_d,cred_lo,cred_hi,pred_lo,pred_hi,tdi_mean,tdi_q05,tdi_q50,"
        "tdi_q95,deti_q50\n";
  for (std::size_t i = 0; i < m.grid.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double mu = m.mu_d(k);
    const double cred = z * std::sqrt(m.var_d(k));
    const double band = z * std::sqrt(pred(k));
    os << fmt(m.grid[i]) << ',' << fmt(mu) << ',' << fmt(mu - cred) << ','
       << fmt(mu + cred) << ',' << fmt(mu - band) << ',' << fmt(mu + band) << ','
       << fmt(s.tdi_mean[i]) << ',' << fmt(s.tdi_q05[i]) << ','
       << fmt(s.tdi_q50[i]) << ',' << fmt(s.tdi_q95[i]) << ','
       << fmt(s.deti_q50[i]) << '\n';
  }
  if (out_path.empty() || out_path == "-") {
    out << os.str();
  } else {
    write_file_atomic(out_path, os.str());
  }
  return kOk;
}

int cmd_validate(const fs::path& input, double domain_end, std::ostream& out) {
  nlohmann::ordered_json report_json = nlohmann::ordered_json::array();
  int invalid = 0;
  for (const auto& rows : read_match_rows(input)) {
    nlohmann::ordered_json j;
    j["match_id"] = rows.front().match_id;
    try {
      const auto s = parse_play_by_play(rows, domain_end);
      j["events"] = s.size();
      j["warnings"] = validate_series(s);
    } catch (const Error& e) {
      ++invalid;
      j["error"] = std::string(to_string(e.code()));
      j["message"] = e.what();
    }
    report_json.push_back(std::move(j));
  }
  out << report_json.dump(2) << '\n';
  return invalid == 0 ? kOk : kInputError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Trend indices for live score differences", "scoretrend"};
  app.footer(kConfigHelp);
  app.require_subcommand(1);

  std::string input, out_dir, match_id, plot_out;
  std::optional<double> until;
  int c_max = 8;
  double domain_end = kDefaultDomainEnd;

  Overrides fit_o;
  auto* fit = app.add_subcommand("fit", "Fit one match and write a result bundle");
  fit->add_option("--input", input, "Play-by-play CSV or series JSON")
      ->required()->check(CLI::ExistingFile);
  fit->add_option("--match", match_id, "Match id when the CSV holds several");
  fit->add_option("--until", until, "Use only events up to this minute");
  fit->add_option("--out", out_dir, "Bundle directory")->required();
  add_common(fit, fit_o);
  fit->footer(kConfigHelp);

  Overrides season_o;
  auto* season = app.add_subcommand("season", "Fit every match and summarize");
  season->add_option("--input", input, "Directory of CSVs or one combined CSV")
      ->required()->check(CLI::ExistingPath);
  season->add_option("--out", out_dir, "Output directory")->required();
  season->add_option("--c-max", c_max, "Largest group count tried")
      ->check(CLI::Range(1, 64));
  add_common(season, season_o);
  season->footer(kConfigHelp);

  auto* plot = app.add_subcommand("plotdata", "Grid curves of a bundle as CSV");
  plot->add_option("--input", input, "Bundle directory")->required();
  plot->add_option("--out", plot_out, "CSV file (default stdout)");

  auto* validate = app.add_subcommand("validate", "Check play-by-play input");
  validate->add_option("--input", input, "Directory of CSVs or one CSV")
      ->required()->check(CLI::ExistingPath);
  validate->add_option("--domain-end", domain_end, "Regulation length, minutes")
      ->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    report(err, "InvalidInput", e.what());
    return kInputError;
  }

  try {
    if (*fit) return cmd_fit(input, match_id, until, out_dir, fit_o, out, err);
    if (*season) return cmd_season(input, out_dir, c_max, season_o, out, err);
    if (*plot) return cmd_plotdata(input, plot_out, out);
    return cmd_validate(input, domain_end, out);
  } catch (const Error& e) {
    report(err, to_string(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    report(err, "InvalidInput", e.what());
    return kInputError;
  }
}

}  // namespace scoretrend::cli
