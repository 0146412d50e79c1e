// Report assembly and persistence: the per-cell aggregate table, the
// per-replication log, method summaries (mean absolute deviation from the
// target level), and the coverage-ranked scenario ordering. All writers are
// byte-deterministic for fixed inputs.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bootci/coverage.hpp"
#include "bootci/scenarios.hpp"
#include "bootci/table.hpp"

namespace bootci {

namespace detail {

inline std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

// Full-precision round-trip format for interval endpoints.
inline std::string fmt_g17(double v) { return fmt("%.17g", v); }
inline std::string fmt_f6(double v) { return fmt("%.6f", v); }
inline std::string fmt_g6(double v) { return fmt("%.6g", v); }

inline double parse_double(std::string_view cell, const std::string& what) {
  std::string s(trim(cell));
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  if (s == "nan" || s == "-nan") return NAN;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad numeric field in " + what + ": '" + s + "'");
  }
}

}  // namespace detail

// Identity columns for a cell: scenario factors for grid studies,
// coefficient name for subsample studies.
struct CellLabels {
  std::vector<std::string> columns;             // header names
  std::vector<std::vector<std::string>> rows;   // rows[cell_id]
};

inline CellLabels grid_labels(std::span<const Scenario> grid) {
  CellLabels labels;
  labels.columns = {"scenario_id", "n", "mean_fn", "x_dist", "noise", "true_slope"};
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const Scenario& s = grid[c];
    labels.rows.push_back({std::to_string(c + 1), std::to_string(s.n),
                           mean_fn_name(s.mean_fn), x_dist_name(s.x_dist),
                           noise_name(s.noise), detail::fmt_g17(s.true_slope)});
  }
  return labels;
}

inline CellLabels subsample_labels(const Dataset& population,
                                   std::span<const double> pseudo_truth) {
  CellLabels labels;
  labels.columns = {"coefficient", "pseudo_truth"};
  for (std::int64_t j = 0; j < population.k(); ++j) {
    labels.rows.push_back({population.coef_names()[static_cast<std::size_t>(j)],
                           detail::fmt_g17(pseudo_truth[static_cast<std::size_t>(j)])});
  }
  return labels;
}

inline void write_cells_tsv(std::ostream& out, const CoverageStudy& study,
                            const CellLabels& labels) {
  for (const auto& c : labels.columns) out << c << '\t';
  out << "method\tlevel\tcoverage\tmc_se\tavg_length\tfailures\n";
  for (const CoverageCell& cell : study.cells) {
    for (const auto& v : labels.rows[static_cast<std::size_t>(cell.cell_id)]) {
      out << v << '\t';
    }
    out << method_name(cell.method) << '\t' << detail::fmt_g6(cell.level) << '\t'
        << detail::fmt_f6(cell.coverage()) << '\t' << detail::fmt_f6(cell.mc_se())
        << '\t' << detail::fmt_g6(cell.avg_length()) << '\t' << cell.failures << '\n';
  }
}

inline void write_log_tsv(std::ostream& out, const CoverageStudy& study,
                          const CellLabels& labels) {
  for (const auto& c : labels.columns) out << c << '\t';
  out << "method\tlevel\treplication\tlower\tupper\tcovered\tlength\tfailed\n";
  if (study.cells.empty()) return;
  for (const LogRecord& rec : study.log) {
    for (const auto& v : labels.rows[static_cast<std::size_t>(rec.cell_id)]) {
      out << v << '\t';
    }
    out << method_name(rec.method) << '\t';
    // level lives on the matching cell; every record of a study shares it
    out << detail::fmt_g6(study.cells.front().level) << '\t' << rec.replication << '\t';
    if (rec.failed) {
      out << "nan\tnan\t0\tnan\t1\n";
    } else {
      out << detail::fmt_g17(rec.lower) << '\t' << detail::fmt_g17(rec.upper) << '\t'
          << (rec.covered ? 1 : 0) << '\t' << detail::fmt_g17(rec.upper - rec.lower)
          << "\t0\n";
    }
  }
}

// Per-method mean absolute deviation from the target level, in percentage
// points, over the cells of a study.
struct MethodSummary {
  Method method{};
  double mad_pp = 0.0;
  std::int64_t cells = 0;
};

inline std::vector<MethodSummary> method_mad(const CoverageStudy& study) {
  std::vector<MethodSummary> out;
  for (const CoverageCell& cell : study.cells) {
    MethodSummary* slot = nullptr;
    for (auto& s : out) {
      if (s.method == cell.method) slot = &s;
    }
    if (!slot) {
      out.push_back(MethodSummary{cell.method, 0.0, 0});
      slot = &out.back();
    }
    slot->mad_pp += std::fabs(cell.coverage() - cell.level) * 100.0;
    slot->cells += 1;
  }
  for (auto& s : out) s.mad_pp /= static_cast<double>(s.cells);
  return out;
}

// Scenario numbering: cells ranked by calibrated-percentile coverage,
// ascending (ties by cell id). Falls back to cell id order when the method
// is absent.
inline std::vector<std::int64_t> scenario_order(const CoverageStudy& study) {
  std::vector<std::pair<double, std::int64_t>> keyed;
  for (const CoverageCell& cell : study.cells) {
    if (cell.method == Method::kPercCal2) {
      keyed.emplace_back(cell.coverage(), cell.cell_id);
    }
  }
  if (keyed.empty()) {
    for (const CoverageCell& cell : study.cells) {
      bool seen = false;
      for (const auto& [cov, id] : keyed) seen |= (id == cell.cell_id);
      if (!seen) keyed.emplace_back(0.0, cell.cell_id);
    }
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::int64_t> order;
  order.reserve(keyed.size());
  for (const auto& [cov, id] : keyed) order.push_back(id);
  return order;
}

inline void write_summary_text(std::ostream& out, const CoverageStudy& study,
                               const CellLabels& labels) {
  const double level = study.cells.empty() ? 0.0 : study.cells.front().level;
  out << "target level: " << detail::fmt_g6(level) << "\n\n";
  out << "mean absolute deviation from target (percentage points):\n";
  for (const MethodSummary& s : method_mad(study)) {
    out << "  " << method_name(s.method) << "\t" << detail::fmt_f6(s.mad_pp) << "\n";
  }
  const auto order = scenario_order(study);
  out << "\ncells ranked by perc_cal_2 coverage (ascending):\n";
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    out << "  " << (rank + 1) << ":";
    for (const auto& v : labels.rows[static_cast<std::size_t>(order[rank])]) {
      out << " " << v;
    }
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Recomputing a report from a persisted per-replication log. The identity
// block is every column before "method"; the trailing schema is fixed.

struct RecomputedReport {
  CellLabels labels;
  CoverageStudy study;
};

inline RecomputedReport recompute_from_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open log file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty log file");
  const auto header = detail::split_line(line, '\t');
  std::size_t method_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (detail::trim(header[c]) == "method") method_col = c;
  }
  if (method_col == header.size() || method_col == 0) {
    throw ParseError("log file lacks a method column after an identity block");
  }
  const std::vector<std::string> tail = {"level",   "replication", "lower", "upper",
                                         "covered", "length",      "failed"};
  if (header.size() != method_col + 1 + tail.size()) {
    throw ParseError("unexpected log schema");
  }
  for (std::size_t t = 0; t < tail.size(); ++t) {
    if (detail::trim(header[method_col + 1 + t]) != tail[t]) {
      throw ParseError("unexpected log column: expected " + tail[t]);
    }
  }

  RecomputedReport rep;
  for (std::size_t c = 0; c < method_col; ++c) {
    rep.labels.columns.emplace_back(detail::trim(header[c]));
  }
  std::map<std::vector<std::string>, std::int64_t> cell_ids;
  std::map<std::pair<std::int64_t, std::string>, CoverageCell> cells;
  std::int64_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells_v = detail::split_line(line, '\t');
    if (cells_v.size() != header.size()) {
      throw ParseError("log row " + std::to_string(row) + ": wrong field count");
    }
    std::vector<std::string> identity;
    for (std::size_t c = 0; c < method_col; ++c) {
      identity.emplace_back(detail::trim(cells_v[c]));
    }
    auto [it, inserted] =
        cell_ids.emplace(identity, static_cast<std::int64_t>(cell_ids.size()));
    if (inserted) rep.labels.rows.push_back(identity);
    const std::int64_t cell_id = it->second;
    const std::string method(detail::trim(cells_v[method_col]));
    const double level = detail::parse_double(cells_v[method_col + 1], "level");
    const bool failed = detail::parse_double(cells_v[method_col + 7], "failed") != 0.0;
    const bool covered = detail::parse_double(cells_v[method_col + 5], "covered") != 0.0;
    const double lower = detail::parse_double(cells_v[method_col + 3], "lower");
    const double upper = detail::parse_double(cells_v[method_col + 4], "upper");
    CoverageCell& cell = cells[{cell_id, method}];
    cell.cell_id = cell_id;
    cell.method = parse_method(method);
    cell.level = level;
    if (failed) {
      ++cell.failures;
    } else {
      covered ? ++cell.cover : ++cell.miss;
      cell.total_length += upper - lower;
    }
  }
  for (const auto& [key, cell] : cells) rep.study.cells.push_back(cell);
  std::stable_sort(rep.study.cells.begin(), rep.study.cells.end(),
                   [](const CoverageCell& a, const CoverageCell& b) {
                     return a.cell_id < b.cell_id;
                   });
  return rep;
}

}  // namespace bootci
