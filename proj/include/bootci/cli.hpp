// Command-line surface: ci, simulate, subsample, report. Kept in a header
// so tests can drive it in-process; the binary under tools/ is a thin shim.
//
// Exit codes: 0 success, 1 compute/data error, 2 usage error.
#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bootci/coverage.hpp"
#include "bootci/intervals.hpp"
#include "bootci/report.hpp"
#include "bootci/scenarios.hpp"
#include "bootci/table.hpp"

namespace bootci {

inline GridConfig grid_config_from_json(const nlohmann::json& j) {
  GridConfig cfg;
  if (j.contains("n")) cfg.ns = j.at("n").get<std::vector<std::int64_t>>();
  if (j.contains("mean_fn")) {
    cfg.mean_fns.clear();
    for (const auto& s : j.at("mean_fn")) cfg.mean_fns.push_back(parse_mean_fn(s.get<std::string>()));
  }
  if (j.contains("x_dist")) {
    cfg.x_dists.clear();
    for (const auto& s : j.at("x_dist")) cfg.x_dists.push_back(parse_x_dist(s.get<std::string>()));
  }
  if (j.contains("noise")) {
    cfg.noises.clear();
    for (const auto& s : j.at("noise")) cfg.noises.push_back(parse_noise(s.get<std::string>()));
  }
  if (j.contains("exclude")) {
    cfg.exclude.clear();
    for (const auto& e : j.at("exclude")) {
      cfg.exclude.emplace_back(parse_mean_fn(e.at("mean_fn").get<std::string>()),
                               parse_x_dist(e.at("x_dist").get<std::string>()));
    }
  }
  return cfg;
}

inline GridConfig load_grid_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open grid config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("bad grid config: " + std::string(e.what()));
  }
  return grid_config_from_json(j);
}

namespace detail {

inline std::vector<Method> parse_method_list(const std::string& csv) {
  std::vector<Method> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto name = trim(item);
    if (!name.empty()) out.push_back(parse_method(name));
  }
  if (out.empty()) throw UsageError("empty method list");
  return out;
}

inline void write_file_or_stdout(const std::optional<std::string>& path,
                                 const std::string& content, std::ostream& fallback) {
  if (path) {
    std::ofstream out(*path, std::ios::binary);
    if (!out) throw UsageError("cannot open output file: " + *path);
    out << content;
  } else {
    fallback << content;
  }
}

struct CommonFlags {
  double alpha = 0.10;
  std::int64_t b1 = 2000;
  std::int64_t b2 = 2000;
  std::uint64_t seed = 0;
  int threads = 1;

  void attach(CLI::App* app) {
    app->add_option("--alpha", alpha, "miss probability; target level is 1-alpha")
        ->check(CLI::Range(1e-6, 0.999999));
    app->add_option("--b1", b1, "first-level bootstrap resamples");
    app->add_option("--b2", b2, "second-level bootstrap resamples");
    app->add_option("--seed", seed, "master seed; all randomness derives from it");
    app->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }
};

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"assumption-lean confidence intervals for least-squares slopes"};
  app.require_subcommand(1);

  // --- ci ---
  auto* ci = app.add_subcommand("ci", "intervals for one delimited dataset");
  detail::CommonFlags ci_flags;
  ci_flags.attach(ci);
  std::string ci_input, ci_response;
  std::string ci_methods = "perc_cal_2";
  std::string ci_delim = ",";
  std::optional<std::string> ci_out;
  ci->add_option("--input", ci_input, "delimited text file with a header row")->required();
  ci->add_option("--response", ci_response, "response column name")->required();
  ci->add_option("--methods", ci_methods, "comma-separated method list");
  ci->add_option("--delim", ci_delim, "field delimiter (single character, or 'tab')");
  ci->add_option("--out", ci_out, "also write the table to this file");

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "coverage study over the scenario grid");
  detail::CommonFlags sim_flags;
  sim_flags.attach(sim);
  std::int64_t sim_reps = 500;
  std::string sim_methods;
  std::optional<std::string> sim_grid_cfg, sim_out, sim_log;
  sim->add_option("--reps", sim_reps, "replications per cell")->check(CLI::PositiveNumber);
  sim->add_option("--methods", sim_methods, "comma-separated method list");
  sim->add_option("--grid-config", sim_grid_cfg, "JSON grid config (factors, exclusions)");
  sim->add_option("--out", sim_out, "aggregate table output file");
  sim->add_option("--log", sim_log, "per-replication log output file");

  // --- subsample ---
  auto* sub = app.add_subcommand("subsample", "finite-population subsampling study");
  detail::CommonFlags sub_flags;
  sub_flags.attach(sub);
  std::int64_t sub_m = 500, sub_reps = 1000, sub_standin = 0;
  std::string sub_input, sub_response;
  std::string sub_methods = "perc_cal_2,z";
  std::string sub_delim = ",";
  std::optional<std::string> sub_out, sub_log;
  sub->add_option("--input", sub_input, "population as delimited text");
  sub->add_option("--response", sub_response, "response column name (with --input)");
  sub->add_option("--delim", sub_delim, "field delimiter for --input");
  sub->add_option("--standin", sub_standin,
                  "use the built-in stand-in population with this many rows");
  sub->add_option("--m", sub_m, "subsample size")->check(CLI::PositiveNumber);
  sub->add_option("--reps", sub_reps, "replications")->check(CLI::PositiveNumber);
  sub->add_option("--methods", sub_methods, "comma-separated method list");
  sub->add_option("--out", sub_out, "aggregate table output file");
  sub->add_option("--log", sub_log, "per-replication log output file");

  // --- report ---
  auto* rep = app.add_subcommand("report", "recompute aggregates from a replication log");
  std::string rep_log;
  std::optional<std::string> rep_out, rep_cells;
  rep->add_option("--log", rep_log, "per-replication log file")->required();
  rep->add_option("--out", rep_out, "summary text output file");
  rep->add_option("--cells", rep_cells, "recomputed aggregate table output file");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  const auto parse_delim = [](const std::string& d) -> char {
    if (d == "tab" || d == "\\t") return '\t';
    if (d.size() != 1) throw UsageError("delimiter must be one character or 'tab'");
    return d[0];
  };

  try {
    if (app.got_subcommand(ci)) {
      const std::vector<Method> methods = detail::parse_method_list(ci_methods);
      const double level = 1.0 - ci_flags.alpha;
      const RawTable table = read_table_file(ci_input, parse_delim(ci_delim));
      const Dataset data = dataset_from_table(table, ci_response);
      BootConfig cfg{ci_flags.b1, ci_flags.b2, ci_flags.seed, 100, ci_flags.threads};
      std::vector<std::int64_t> coefs(static_cast<std::size_t>(data.k()));
      std::iota(coefs.begin(), coefs.end(), 0);
      const auto matrix = compute_interval_matrix(data, coefs, methods, level, cfg);
      std::ostringstream text;
      text << "coefficient\tmethod\tlevel\tlower\tupper\tlambda_hat\tnote\n";
      for (std::size_t c = 0; c < coefs.size(); ++c) {
        for (std::size_t m = 0; m < methods.size(); ++m) {
          const IntervalEstimate& est = matrix[c][m];
          text << data.coef_names()[c] << '\t' << method_name(est.method) << '\t'
               << detail::fmt_g6(est.level) << '\t' << detail::fmt_g17(est.lower)
               << '\t' << detail::fmt_g17(est.upper) << '\t'
               << (est.lambda_hat ? detail::fmt_g17(*est.lambda_hat) : std::string("-"))
               << '\t' << (est.degenerate_bias ? "degenerate_bias" : "-") << '\n';
        }
      }
      out << text.str();
      if (ci_out) detail::write_file_or_stdout(ci_out, text.str(), out);
      return 0;
    }

    if (app.got_subcommand(sim)) {
      StudyConfig cfg;
      cfg.level = 1.0 - sim_flags.alpha;
      cfg.reps = sim_reps;
      cfg.b1 = sim_flags.b1;
      cfg.b2 = sim_flags.b2;
      cfg.master_seed = sim_flags.seed;
      cfg.threads = sim_flags.threads;
      cfg.keep_log = sim_log.has_value();
      if (!sim_methods.empty()) cfg.methods = detail::parse_method_list(sim_methods);
      const GridConfig gc = sim_grid_cfg ? load_grid_config(*sim_grid_cfg) : GridConfig{};
      const std::vector<Scenario> grid = scenario_grid(gc);
      if (grid.empty()) throw UsageError("grid config produced no scenarios");
      const CoverageStudy study = run_grid(grid, cfg);
      const CellLabels labels = grid_labels(grid);
      std::ostringstream cells_text;
      write_cells_tsv(cells_text, study, labels);
      detail::write_file_or_stdout(sim_out, cells_text.str(), out);
      if (sim_log) {
        std::ostringstream log_text;
        write_log_tsv(log_text, study, labels);
        detail::write_file_or_stdout(sim_log, log_text.str(), out);
      }
      std::ostringstream summary;
      write_summary_text(summary, study, labels);
      if (sim_out) out << summary.str();
      return 0;
    }

    if (app.got_subcommand(sub)) {
      if (sub_input.empty() == (sub_standin == 0)) {
        throw UsageError("subsample needs exactly one of --input or --standin");
      }
      Dataset population =
          sub_input.empty()
              ? standin_population(sub_standin)
              : dataset_from_table(read_table_file(sub_input, parse_delim(sub_delim)),
                                   sub_response);
      SubsampleStudySpec spec{std::move(population), sub_m, sub_reps,
                              detail::parse_method_list(sub_methods),
                              1.0 - sub_flags.alpha};
      StudyConfig cfg;
      cfg.b1 = sub_flags.b1;
      cfg.b2 = sub_flags.b2;
      cfg.master_seed = sub_flags.seed;
      cfg.threads = sub_flags.threads;
      cfg.keep_log = sub_log.has_value();
      const std::vector<double> pseudo_truth = fit_ols(spec.population).beta;
      const CellLabels labels = subsample_labels(spec.population, pseudo_truth);
      const CoverageStudy study = subsample_study(spec, cfg);
      std::ostringstream cells_text;
      write_cells_tsv(cells_text, study, labels);
      detail::write_file_or_stdout(sub_out, cells_text.str(), out);
      if (sub_log) {
        std::ostringstream log_text;
        write_log_tsv(log_text, study, labels);
        detail::write_file_or_stdout(sub_log, log_text.str(), out);
      }
      return 0;
    }

    if (app.got_subcommand(rep)) {
      const RecomputedReport recomputed = recompute_from_log(rep_log);
      std::ostringstream summary;
      write_summary_text(summary, recomputed.study, recomputed.labels);
      detail::write_file_or_stdout(rep_out, summary.str(), out);
      if (rep_cells) {
        std::ostringstream cells_text;
        write_cells_tsv(cells_text, recomputed.study, recomputed.labels);
        detail::write_file_or_stdout(rep_cells, cells_text.str(), out);
      }
      return 0;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "error: no subcommand\n";
  return 2;
}

}  // namespace bootci
