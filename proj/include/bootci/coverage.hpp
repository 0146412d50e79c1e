// Monte Carlo coverage engine: replication loops over synthetic scenarios,
// the finite-population subsampling study, and per-cell aggregation.
//
// Stream layout per study: replication r of cell c draws its dataset (or
// subsample) from [2, c, r] and derives the master seed for its interval
// computations from the first word of [3, c, r], so replications stay
// independent and the whole study is reproducible for any thread count.
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bootci/intervals.hpp"
#include "bootci/parallel.hpp"
#include "bootci/scenarios.hpp"

namespace bootci {

struct StudyConfig {
  std::vector<Method> methods = default_study_methods();
  double level = 0.90;
  std::int64_t reps = 500;
  std::int64_t b1 = 2000;
  std::int64_t b2 = 2000;
  std::uint64_t master_seed = 0;
  int max_redraws = 100;
  int threads = 1;     // replication-level workers
  bool keep_log = false;

  BootConfig boot_for(std::uint64_t rep_seed) const {
    return BootConfig{b1, b2, rep_seed, max_redraws, 1};
  }
};

// Per (cell, method) tallies. cover + miss + failures == requested reps.
struct CoverageCell {
  std::int64_t cell_id = 0;
  Method method{};
  double level = 0.0;
  std::int64_t cover = 0;
  std::int64_t miss = 0;
  std::int64_t failures = 0;
  double total_length = 0.0;  // over non-failed replications

  std::int64_t replications() const { return cover + miss; }
  double coverage() const {
    const auto r = replications();
    return r > 0 ? static_cast<double>(cover) / static_cast<double>(r) : 0.0;
  }
  double mc_se() const {
    const auto r = replications();
    if (r <= 0) return 0.0;
    const double c = coverage();
    return std::sqrt(c * (1.0 - c) / static_cast<double>(r));
  }
  double avg_length() const {
    const auto r = replications();
    return r > 0 ? total_length / static_cast<double>(r) : 0.0;
  }
};

struct LogRecord {
  std::int64_t cell_id = 0;
  std::int64_t replication = 0;
  Method method{};
  double lower = 0.0;
  double upper = 0.0;
  bool covered = false;
  bool failed = false;
};

struct CoverageStudy {
  std::vector<CoverageCell> cells;  // cell-major, methods in request order
  std::vector<LogRecord> log;       // kept only when requested
};

namespace detail {

struct RepOutcome {
  double lower = 0.0, upper = 0.0;
  bool covered = false, failed = false;
};

// Statistical failures become failure counts; anything else propagates.
template <class Fn>
inline RepOutcome guarded_interval(double truth, Fn&& fn) {
  RepOutcome out;
  try {
    const IntervalEstimate est = fn();
    out.lower = est.lower;
    out.upper = est.upper;
    out.covered = (est.lower <= truth && truth <= est.upper);
  } catch (const TooManyDegenerateResamples&) {
    out.failed = true;
  } catch (const SingularDesign&) {
    out.failed = true;
  } catch (const LeverageOne&) {
    out.failed = true;
  }
  return out;
}

inline void mark_failed(std::vector<RepOutcome>& row) {
  for (auto& o : row) {
    o = RepOutcome{};
    o.failed = true;
  }
}

inline void fold_outcomes(const StudyConfig& cfg, std::int64_t cell_id,
                          const std::vector<std::vector<RepOutcome>>& by_rep,
                          CoverageStudy& study) {
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    CoverageCell cell;
    cell.cell_id = cell_id;
    cell.method = cfg.methods[mi];
    cell.level = cfg.level;
    for (const auto& rep : by_rep) {
      const RepOutcome& o = rep[mi];
      if (o.failed) {
        ++cell.failures;
      } else {
        o.covered ? ++cell.cover : ++cell.miss;
        cell.total_length += o.upper - o.lower;
      }
    }
    study.cells.push_back(cell);
  }
  if (cfg.keep_log) {
    for (std::size_t r = 0; r < by_rep.size(); ++r) {
      for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        const RepOutcome& o = by_rep[r][mi];
        study.log.push_back(LogRecord{cell_id, static_cast<std::int64_t>(r),
                                      cfg.methods[mi], o.lower, o.upper, o.covered,
                                      o.failed});
      }
    }
  }
}

}  // namespace detail

// Coverage of the slope interval for one scenario cell.
inline CoverageStudy run_cell(const Scenario& s, std::int64_t cell_id,
                              const StudyConfig& cfg) {
  if (cfg.reps < 2) throw UsageError("reps must be >= 2");
  if (!std::isfinite(s.true_slope)) {
    throw NonFiniteEstimand("scenario " + s.label() + " has no finite slope");
  }
  std::vector<std::vector<detail::RepOutcome>> by_rep(
      static_cast<std::size_t>(cfg.reps),
      std::vector<detail::RepOutcome>(cfg.methods.size()));
  parallel_for(cfg.reps, cfg.threads, [&](std::int64_t r, int) {
    Stream data_stream(make_key(cfg.master_seed, {kCtxDataDraw, cell_id, r}));
    const Dataset data = draw_scenario(s, data_stream);
    Stream seed_stream(make_key(cfg.master_seed, {kCtxSeedDerive, cell_id, r}));
    const BootConfig bc = cfg.boot_for(seed_stream.next_u64());
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      by_rep[static_cast<std::size_t>(r)][mi] = detail::guarded_interval(
          s.true_slope,
          [&] { return compute_interval(data, 1, cfg.level, cfg.methods[mi], bc); });
    }
  });
  CoverageStudy study;
  detail::fold_outcomes(cfg, cell_id, by_rep, study);
  return study;
}

inline CoverageStudy run_grid(std::span<const Scenario> grid, const StudyConfig& cfg) {
  CoverageStudy study;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    CoverageStudy cell = run_cell(grid[c], static_cast<std::int64_t>(c), cfg);
    study.cells.insert(study.cells.end(), cell.cells.begin(), cell.cells.end());
    study.log.insert(study.log.end(), cell.log.begin(), cell.log.end());
  }
  return study;
}

struct SubsampleStudySpec {
  explicit SubsampleStudySpec(Dataset pop) : population(std::move(pop)) {}
  SubsampleStudySpec(Dataset pop, std::int64_t m_, std::int64_t reps_,
                     std::vector<Method> methods_, double level_)
      : population(std::move(pop)),
        m(m_),
        reps(reps_),
        methods(std::move(methods_)),
        level(level_) {}

  Dataset population;
  std::int64_t m = 500;      // subsample size, at most n_population
  std::int64_t reps = 10000;
  std::vector<Method> methods = {Method::kPercCal2, Method::kZ};
  double level = 0.90;
};

// Full-population least squares is the pseudo-truth; each replication draws
// m rows without replacement and measures per-coefficient coverage. Cells
// are keyed by coefficient index.
inline CoverageStudy subsample_study(const SubsampleStudySpec& spec,
                                     const StudyConfig& cfg) {
  const Dataset& pop = spec.population;
  const std::int64_t big_n = pop.n(), k = pop.k();
  if (spec.m < k + 1 || spec.m > big_n) {
    throw UsageError("subsample size must be in [p+2, n_population]");
  }
  if (spec.reps < 1) throw UsageError("reps must be >= 1");
  const std::vector<double> pseudo_truth = fit_ols(pop).beta;
  std::vector<std::int64_t> coefs(static_cast<std::size_t>(k));
  std::iota(coefs.begin(), coefs.end(), 0);

  StudyConfig run_cfg = cfg;
  run_cfg.methods = spec.methods;
  run_cfg.level = spec.level;
  run_cfg.reps = spec.reps;

  // by_rep[r][coef * nmethods + mi]
  const std::size_t nmethods = spec.methods.size();
  std::vector<std::vector<detail::RepOutcome>> by_rep(
      static_cast<std::size_t>(spec.reps),
      std::vector<detail::RepOutcome>(static_cast<std::size_t>(k) * nmethods));
  const int workers = std::max(1, run_cfg.threads);
  std::vector<std::vector<std::uint32_t>> perm_scratch(
      static_cast<std::size_t>(workers));
  parallel_for(spec.reps, run_cfg.threads, [&](std::int64_t r, int w) {
    auto& perm = perm_scratch[static_cast<std::size_t>(w)];
    perm.resize(static_cast<std::size_t>(big_n));
    std::iota(perm.begin(), perm.end(), 0u);
    Stream draw_stream(make_key(run_cfg.master_seed, {kCtxDataDraw, 0, r}));
    for (std::int64_t i = 0; i < spec.m; ++i) {
      const auto j = i + static_cast<std::int64_t>(
                             draw_stream.next_below(static_cast<std::uint64_t>(big_n - i)));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    std::vector<double> design(static_cast<std::size_t>(spec.m * k));
    std::vector<double> y(static_cast<std::size_t>(spec.m));
    for (std::int64_t i = 0; i < spec.m; ++i) {
      const auto row = pop.row(perm[static_cast<std::size_t>(i)]);
      std::copy(row.begin(), row.end(), design.begin() + i * k);
      y[static_cast<std::size_t>(i)] = pop.y(perm[static_cast<std::size_t>(i)]);
    }
    const Dataset sub(std::move(design), std::move(y), k, pop.coef_names());
    Stream seed_stream(make_key(run_cfg.master_seed, {kCtxSeedDerive, 0, r}));
    const BootConfig bc = run_cfg.boot_for(seed_stream.next_u64());
    auto& row = by_rep[static_cast<std::size_t>(r)];
    // Methods that share one resampling tree succeed or fail together;
    // the rest are guarded per (coefficient, method).
    std::vector<Method> batched;
    std::vector<std::size_t> batched_mi;
    for (std::size_t mi = 0; mi < nmethods; ++mi) {
      const Method m = spec.methods[mi];
      if (m == Method::kPerc || m == Method::kBca || m == Method::kPercCal2 ||
          m == Method::kPercCal1) {
        batched.push_back(m);
        batched_mi.push_back(mi);
      }
    }
    if (!batched.empty()) {
      bool batch_failed = false;
      std::vector<std::vector<IntervalEstimate>> matrix;
      try {
        matrix = compute_interval_matrix(sub, coefs, batched, spec.level, bc);
      } catch (const TooManyDegenerateResamples&) {
        batch_failed = true;
      } catch (const SingularDesign&) {
        batch_failed = true;
      } catch (const LeverageOne&) {
        batch_failed = true;
      }
      for (std::int64_t ci = 0; ci < k; ++ci) {
        for (std::size_t bi = 0; bi < batched.size(); ++bi) {
          detail::RepOutcome o;
          if (batch_failed) {
            o.failed = true;
          } else {
            const IntervalEstimate& est = matrix[static_cast<std::size_t>(ci)][bi];
            o.lower = est.lower;
            o.upper = est.upper;
            const double truth = pseudo_truth[static_cast<std::size_t>(ci)];
            o.covered = (est.lower <= truth && truth <= est.upper);
          }
          row[static_cast<std::size_t>(ci) * nmethods + batched_mi[bi]] = o;
        }
      }
    }
    for (std::size_t mi = 0; mi < nmethods; ++mi) {
      const Method m = spec.methods[mi];
      if (m == Method::kPerc || m == Method::kBca || m == Method::kPercCal2 ||
          m == Method::kPercCal1) {
        continue;
      }
      for (std::int64_t ci = 0; ci < k; ++ci) {
        row[static_cast<std::size_t>(ci) * nmethods + mi] = detail::guarded_interval(
            pseudo_truth[static_cast<std::size_t>(ci)],
            [&] { return compute_interval(sub, ci, spec.level, m, bc); });
      }
    }
  });

  CoverageStudy study;
  for (std::int64_t ci = 0; ci < k; ++ci) {
    for (std::size_t mi = 0; mi < nmethods; ++mi) {
      CoverageCell cell;
      cell.cell_id = ci;
      cell.method = spec.methods[mi];
      cell.level = spec.level;
      for (std::int64_t r = 0; r < spec.reps; ++r) {
        const detail::RepOutcome& o =
            by_rep[static_cast<std::size_t>(r)][static_cast<std::size_t>(ci) * nmethods + mi];
        if (o.failed) {
          ++cell.failures;
        } else {
          o.covered ? ++cell.cover : ++cell.miss;
          cell.total_length += o.upper - o.lower;
        }
      }
      study.cells.push_back(cell);
      if (run_cfg.keep_log) {
        for (std::int64_t r = 0; r < spec.reps; ++r) {
          const detail::RepOutcome& o =
              by_rep[static_cast<std::size_t>(r)][static_cast<std::size_t>(ci) * nmethods + mi];
          study.log.push_back(LogRecord{ci, r, spec.methods[mi], o.lower, o.upper,
                                        o.covered, o.failed});
        }
      }
    }
  }
  return study;
}

}  // namespace bootci
