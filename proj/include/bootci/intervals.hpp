// Confidence intervals for least-squares coefficients: normal-theory and
// sandwich intervals, pairs-bootstrap percentile / studentized / bootstrap-t
// / BCa, and the double-bootstrap calibrated percentile constructions.
//
// Randomness layout: within one interval computation, first-level resample
// slot b (attempt t) draws from stream [1, t*B1 + b] and its second-level
// slot c (attempt s) from [1, t*B1 + b, s*B2 + c]. Attempts beyond the first
// happen only when a resample is degenerate, and their streams never collide
// with other slots, so parallel execution is bit-reproducible.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bootci/dataset.hpp"
#include "bootci/errors.hpp"
#include "bootci/ols.hpp"
#include "bootci/parallel.hpp"
#include "bootci/resample.hpp"
#include "bootci/rng.hpp"
#include "bootci/stats.hpp"

namespace bootci {

enum class Method {
  kZ,
  kSandHc0,
  kSandHc1,
  kSandHc2,
  kSandHc3,
  kSandHc4,
  kSandHc5,
  kPerc,
  kStud,
  kBootT,
  kBca,
  kPercCal2,
  kPercCal1,
};

enum class Sided { kOne, kTwo };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::kZ: return "z";
    case Method::kSandHc0: return "sand_hc0";
    case Method::kSandHc1: return "sand_hc1";
    case Method::kSandHc2: return "sand_hc2";
    case Method::kSandHc3: return "sand_hc3";
    case Method::kSandHc4: return "sand_hc4";
    case Method::kSandHc5: return "sand_hc5";
    case Method::kPerc: return "perc";
    case Method::kStud: return "stud";
    case Method::kBootT: return "boot_t";
    case Method::kBca: return "bca";
    case Method::kPercCal2: return "perc_cal_2";
    case Method::kPercCal1: return "perc_cal_1";
  }
  return "?";
}

inline Method parse_method(std::string_view name) {
  for (Method m : {Method::kZ, Method::kSandHc0, Method::kSandHc1, Method::kSandHc2,
                   Method::kSandHc3, Method::kSandHc4, Method::kSandHc5, Method::kPerc,
                   Method::kStud, Method::kBootT, Method::kBca, Method::kPercCal2,
                   Method::kPercCal1}) {
    if (name == method_name(m)) return m;
  }
  if (name == "perc_cal") return Method::kPercCal2;
  throw UsageError("unknown method: " + std::string(name));
}

// The eleven methods of the comparison studies. sand_hc0 and the one-sided
// calibrated interval exist but are opt-in.
inline std::vector<Method> default_study_methods() {
  return {Method::kZ,        Method::kSandHc1, Method::kSandHc2, Method::kSandHc3,
          Method::kSandHc4,  Method::kSandHc5, Method::kPerc,    Method::kStud,
          Method::kBootT,    Method::kBca,     Method::kPercCal2};
}

struct BootConfig {
  std::int64_t b1 = 2000;
  std::int64_t b2 = 2000;
  std::uint64_t master_seed = 0;
  int max_redraws = 100;  // degenerate-resample retries per slot
  int threads = 1;        // workers over first-level slots

  void validate() const {
    if (b1 < 2) throw UsageError("b1 must be >= 2");
    if (b2 < 2) throw UsageError("b2 must be >= 2");
    if (max_redraws < 0) throw UsageError("max_redraws must be >= 0");
  }
};

struct IntervalEstimate {
  Method method{};
  double level = 0.0;  // 1 - alpha
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> lambda_hat;  // calibrated percentile methods only
  bool degenerate_bias = false;      // BCa fell back to percentile endpoints
};

struct BootstrapHistograms {
  double theta_hat = 0.0;
  std::vector<double> first_level;  // B1 first-level estimates
  std::vector<double> depths;       // B1 ECDF positions of theta_hat
};

struct ResampleDiagnostics {
  std::int64_t outer_redraws = 0;
  std::int64_t inner_redraws = 0;
};

// ---------------------------------------------------------------------------
// Pure assembly pieces (directly testable with injected values).

// Equal-tailed percentile endpoints of a set of bootstrap estimates.
inline std::pair<double, double> percentile_endpoints(std::vector<double> estimates,
                                                      double level) {
  const double alpha = 1.0 - level;
  std::sort(estimates.begin(), estimates.end());
  return {quantile_sorted(estimates, alpha / 2.0),
          quantile_sorted(estimates, 1.0 - alpha / 2.0)};
}

// Pivot inversion shared by stud and boot-t.
inline std::pair<double, double> studentized_endpoints(double theta_hat, double se,
                                                       std::vector<double> tstars,
                                                       double level) {
  const double alpha = 1.0 - level;
  std::sort(tstars.begin(), tstars.end());
  const double t_lo = quantile_sorted(tstars, alpha / 2.0);
  const double t_hi = quantile_sorted(tstars, 1.0 - alpha / 2.0);
  return {theta_hat - se * t_hi, theta_hat - se * t_lo};
}

struct BcaAdjustment {
  double z0 = 0.0;
  double accel = 0.0;
  bool degenerate = false;  // every estimate on one side of theta_hat
};

inline BcaAdjustment bca_adjustment(std::span<const double> estimates, double theta_hat,
                                    std::span<const double> jackknife) {
  BcaAdjustment adj;
  std::int64_t below = 0;
  for (double v : estimates) below += (v < theta_hat);
  if (below == 0 || below == static_cast<std::int64_t>(estimates.size())) {
    adj.degenerate = true;
    return adj;
  }
  adj.z0 = norm_quantile(static_cast<double>(below) /
                         static_cast<double>(estimates.size()));
  const double m = mean_of(jackknife);
  double num = 0.0, den = 0.0;
  for (double v : jackknife) {
    const double d = m - v;
    num += d * d * d;
    den += d * d;
  }
  adj.accel = (den > 0.0) ? num / (6.0 * std::pow(den, 1.5)) : 0.0;
  return adj;
}

inline std::pair<double, double> bca_endpoints(std::vector<double> estimates,
                                               const BcaAdjustment& adj, double level) {
  const double alpha = 1.0 - level;
  std::sort(estimates.begin(), estimates.end());
  if (adj.degenerate) {
    return {quantile_sorted(estimates, alpha / 2.0),
            quantile_sorted(estimates, 1.0 - alpha / 2.0)};
  }
  const auto adjusted = [&](double z) {
    const double zz = adj.z0 + z;
    const double q = norm_cdf(adj.z0 + zz / (1.0 - adj.accel * zz));
    return std::clamp(q, 1e-300, 1.0 - 1e-16);
  };
  const double a1 = adjusted(norm_quantile(alpha / 2.0));
  const double a2 = adjusted(norm_quantile(1.0 - alpha / 2.0));
  const double e1 = quantile_sorted(estimates, a1);
  const double e2 = quantile_sorted(estimates, a2);
  return {std::min(e1, e2), std::max(e1, e2)};
}

// The calibration step: lambda is the (1-alpha) ceiling quantile of the
// depth statistics (two-sided uses d = max(q, 1-q)), clamped into
// (1/2, 1) by half a histogram cell.
inline double calibrate_lambda(const BootstrapHistograms& hist, double alpha,
                               Sided sided, std::int64_t b2) {
  std::vector<double> d = hist.depths;
  if (sided == Sided::kTwo) {
    for (double& q : d) q = std::max(q, 1.0 - q);
  }
  double lambda = empirical_quantile(std::move(d), 1.0 - alpha);
  const double half_cell = 1.0 / (2.0 * static_cast<double>(b2));
  return std::clamp(lambda, 0.5 + half_cell, 1.0 - half_cell);
}

// ---------------------------------------------------------------------------
// Resampling engine.

namespace detail {

struct WorkerScratch {
  OlsKernel kernel;
  ColMatrix outer;
  std::vector<std::uint32_t> idx1, idx2;
  std::vector<double> beta, beta2, inner_vals;
};

// Coefficient estimate of the original data through the same kernel the
// resample fits use.
inline std::vector<double> base_coefficients(const ColMatrix& src) {
  OlsKernel kernel;
  if (!kernel.factor(src, {})) throw SingularDesign("X'X pivot below threshold");
  std::vector<double> beta(static_cast<std::size_t>(src.k()));
  kernel.extract_beta(beta.data());
  return beta;
}

// One accepted first-level resample for slot b: draws with stream
// [1, t*B1 + b], rejecting singular fits. Returns the accepted attempt t and
// leaves the gathered rows in scratch.outer and the fit in scratch.kernel.
inline std::int64_t accept_first_level(const ColMatrix& src, const BootConfig& cfg,
                                       std::int64_t slot, WorkerScratch& ws,
                                       std::atomic<std::int64_t>* redraws) {
  for (std::int64_t t = 0;; ++t) {
    if (t > cfg.max_redraws) {
      throw TooManyDegenerateResamples("first-level resample slot " +
                                       std::to_string(slot));
    }
    Stream stream(make_key(cfg.master_seed, {kCtxBootstrap, t * cfg.b1 + slot}));
    resample_indices(stream, src.n(), ws.idx1);
    if (ws.kernel.factor(src, ws.idx1)) {
      if (t > 0 && redraws) redraws->fetch_add(t, std::memory_order_relaxed);
      return t;
    }
  }
}

// One accepted second-level resample for slot (outer_path, c): streams
// [1, outer_path, s*B2 + c]. The fit stays in scratch.kernel.
inline void accept_second_level(const ColMatrix& outer, const BootConfig& cfg,
                                std::int64_t outer_path, std::int64_t slot,
                                WorkerScratch& ws,
                                std::atomic<std::int64_t>* redraws) {
  for (std::int64_t s = 0;; ++s) {
    if (s > cfg.max_redraws) {
      throw TooManyDegenerateResamples("second-level resample slot " +
                                       std::to_string(slot));
    }
    Stream stream(
        make_key(cfg.master_seed, {kCtxBootstrap, outer_path, s * cfg.b2 + slot}));
    resample_indices(stream, outer.n(), ws.idx2);
    if (ws.kernel.factor(outer, ws.idx2)) {
      if (s > 0 && redraws) redraws->fetch_add(s, std::memory_order_relaxed);
      return;
    }
  }
}

// First-level estimates for the given coefficients; theta is b1 x ncoef
// row-major in slot order. Only singular resamples are redrawn.
inline void first_level_estimates(const ColMatrix& src,
                                  std::span<const std::int64_t> coefs,
                                  const BootConfig& cfg, std::vector<double>& theta,
                                  ResampleDiagnostics* diag) {
  const auto ncoef = static_cast<std::int64_t>(coefs.size());
  theta.resize(static_cast<std::size_t>(cfg.b1 * ncoef));
  std::atomic<std::int64_t> redraws{0};
  std::vector<WorkerScratch> scratch(
      static_cast<std::size_t>(std::max<std::int64_t>(1, std::min<std::int64_t>(cfg.threads, cfg.b1))));
  parallel_for(cfg.b1, cfg.threads, [&](std::int64_t b, int w) {
    WorkerScratch& ws = scratch[static_cast<std::size_t>(w)];
    accept_first_level(src, cfg, b, ws, &redraws);
    ws.beta.resize(static_cast<std::size_t>(src.k()));
    ws.kernel.extract_beta(ws.beta.data());
    for (std::int64_t c = 0; c < ncoef; ++c) {
      theta[static_cast<std::size_t>(b * ncoef + c)] =
          ws.beta[static_cast<std::size_t>(coefs[static_cast<std::size_t>(c)])];
    }
  });
  if (diag) diag->outer_redraws += redraws.load();
}

// Studentized first level: estimate and HC0 standard error per resample;
// zero-se resamples are redrawn along with singular ones.
inline void first_level_studentized(const ColMatrix& src, std::int64_t coef,
                                    const BootConfig& cfg, std::vector<double>& theta,
                                    std::vector<double>& se,
                                    ResampleDiagnostics* diag) {
  theta.resize(static_cast<std::size_t>(cfg.b1));
  se.resize(static_cast<std::size_t>(cfg.b1));
  std::atomic<std::int64_t> redraws{0};
  const std::int64_t k = src.k();
  std::vector<WorkerScratch> scratch(
      static_cast<std::size_t>(std::max<std::int64_t>(1, std::min<std::int64_t>(cfg.threads, cfg.b1))));
  parallel_for(cfg.b1, cfg.threads, [&](std::int64_t b, int w) {
    WorkerScratch& ws = scratch[static_cast<std::size_t>(w)];
    for (std::int64_t t = 0;; ++t) {
      if (t > cfg.max_redraws) {
        throw TooManyDegenerateResamples("first-level resample slot " +
                                         std::to_string(b));
      }
      Stream stream(make_key(cfg.master_seed, {kCtxBootstrap, t * cfg.b1 + b}));
      resample_indices(stream, src.n(), ws.idx1);
      if (!ws.kernel.factor(src, ws.idx1)) continue;
      // Build the resample fit pieces and its HC0 se through the same
      // arithmetic fit_ols + se_for use.
      LsFit fit;
      fit.beta.resize(static_cast<std::size_t>(k));
      ws.kernel.extract_beta(fit.beta.data());
      fit.xtx_inv.resize(static_cast<std::size_t>(k * k));
      ws.kernel.extract_xtx_inv(fit.xtx_inv.data());
      const std::int64_t n = src.n();
      fit.residuals.resize(static_cast<std::size_t>(n));
      fit.leverages.assign(static_cast<std::size_t>(n), 0.0);  // unused by HC0
      const auto row_at = [&](std::int64_t i, std::int64_t c) {
        return src.col(c)[ws.idx1[static_cast<std::size_t>(i)]];
      };
      for (std::int64_t i = 0; i < n; ++i) {
        const double fitted =
            dot_k([&](std::int64_t c) { return row_at(i, c); },
                  [&](std::int64_t c) { return fit.beta[static_cast<std::size_t>(c)]; }, k);
        fit.residuals[static_cast<std::size_t>(i)] =
            src.ycol()[ws.idx1[static_cast<std::size_t>(i)]] - fitted;
      }
      const double s = std::sqrt(
          sandwich_jj(row_at, fit.residuals.data(), fit.leverages.data(),
                      fit.xtx_inv.data(), n, k, coef, SeVariant::kHc0));
      if (s == 0.0) continue;  // zero spread: redraw this resample
      theta[static_cast<std::size_t>(b)] = fit.beta[static_cast<std::size_t>(coef)];
      se[static_cast<std::size_t>(b)] = s;
      if (t > 0) redraws.fetch_add(t, std::memory_order_relaxed);
      return;
    }
  });
  if (diag) diag->outer_redraws += redraws.load();
}

// One nested sweep: first-level estimates plus, per coefficient, the ECDF
// position of theta_hat within each slot's second-level histogram.
inline void nested_depth_sweep(const ColMatrix& src, std::span<const std::int64_t> coefs,
                               std::span<const double> theta_hat, const BootConfig& cfg,
                               std::vector<double>& first_level,
                               std::vector<double>& depths, ResampleDiagnostics* diag) {
  const auto ncoef = static_cast<std::int64_t>(coefs.size());
  first_level.resize(static_cast<std::size_t>(cfg.b1 * ncoef));
  depths.resize(static_cast<std::size_t>(cfg.b1 * ncoef));
  std::atomic<std::int64_t> outer_redraws{0}, inner_redraws{0};
  std::vector<WorkerScratch> scratch(
      static_cast<std::size_t>(std::max<std::int64_t>(1, std::min<std::int64_t>(cfg.threads, cfg.b1))));
  parallel_for(cfg.b1, cfg.threads, [&](std::int64_t b, int w) {
    WorkerScratch& ws = scratch[static_cast<std::size_t>(w)];
    const std::int64_t t = accept_first_level(src, cfg, b, ws, &outer_redraws);
    ws.beta.resize(static_cast<std::size_t>(src.k()));
    ws.kernel.extract_beta(ws.beta.data());
    for (std::int64_t c = 0; c < ncoef; ++c) {
      first_level[static_cast<std::size_t>(b * ncoef + c)] =
          ws.beta[static_cast<std::size_t>(coefs[static_cast<std::size_t>(c)])];
    }
    ws.outer.gather(src, ws.idx1);
    ws.beta2.resize(static_cast<std::size_t>(src.k()));
    std::vector<std::int64_t> le_count(static_cast<std::size_t>(ncoef), 0);
    const std::int64_t outer_path = t * cfg.b1 + b;
    for (std::int64_t c2 = 0; c2 < cfg.b2; ++c2) {
      accept_second_level(ws.outer, cfg, outer_path, c2, ws, &inner_redraws);
      ws.kernel.extract_beta(ws.beta2.data());
      for (std::int64_t c = 0; c < ncoef; ++c) {
        le_count[static_cast<std::size_t>(c)] +=
            (ws.beta2[static_cast<std::size_t>(coefs[static_cast<std::size_t>(c)])] <=
             theta_hat[static_cast<std::size_t>(c)]);
      }
    }
    for (std::int64_t c = 0; c < ncoef; ++c) {
      depths[static_cast<std::size_t>(b * ncoef + c)] =
          static_cast<double>(le_count[static_cast<std::size_t>(c)]) /
          static_cast<double>(cfg.b2);
    }
  });
  if (diag) {
    diag->outer_redraws += outer_redraws.load();
    diag->inner_redraws += inner_redraws.load();
  }
}

// Nested sweep for bootstrap-t: per slot, the first-level estimate and the
// standard deviation of its b2 inner estimates. A slot whose inner sd is
// zero redraws the outer resample.
inline void nested_sd_sweep(const ColMatrix& src, std::int64_t coef,
                            const BootConfig& cfg, std::vector<double>& theta,
                            std::vector<double>& inner_sd, ResampleDiagnostics* diag) {
  theta.resize(static_cast<std::size_t>(cfg.b1));
  inner_sd.resize(static_cast<std::size_t>(cfg.b1));
  std::atomic<std::int64_t> outer_redraws{0}, inner_redraws{0};
  std::vector<WorkerScratch> scratch(
      static_cast<std::size_t>(std::max<std::int64_t>(1, std::min<std::int64_t>(cfg.threads, cfg.b1))));
  parallel_for(cfg.b1, cfg.threads, [&](std::int64_t b, int w) {
    WorkerScratch& ws = scratch[static_cast<std::size_t>(w)];
    for (std::int64_t t = 0;; ++t) {
      if (t > cfg.max_redraws) {
        throw TooManyDegenerateResamples("first-level resample slot " +
                                         std::to_string(b));
      }
      Stream stream(make_key(cfg.master_seed, {kCtxBootstrap, t * cfg.b1 + b}));
      resample_indices(stream, src.n(), ws.idx1);
      if (!ws.kernel.factor(src, ws.idx1)) continue;
      ws.beta.resize(static_cast<std::size_t>(src.k()));
      ws.kernel.extract_beta(ws.beta.data());
      const double theta_star = ws.beta[static_cast<std::size_t>(coef)];
      ws.outer.gather(src, ws.idx1);
      ws.beta2.resize(static_cast<std::size_t>(src.k()));
      ws.inner_vals.resize(static_cast<std::size_t>(cfg.b2));
      const std::int64_t outer_path = t * cfg.b1 + b;
      for (std::int64_t c2 = 0; c2 < cfg.b2; ++c2) {
        accept_second_level(ws.outer, cfg, outer_path, c2, ws, &inner_redraws);
        ws.kernel.extract_beta(ws.beta2.data());
        ws.inner_vals[static_cast<std::size_t>(c2)] =
            ws.beta2[static_cast<std::size_t>(coef)];
      }
      const double sd = sample_sd(ws.inner_vals);
      if (sd == 0.0) continue;  // degenerate inner spread: redraw the outer
      theta[static_cast<std::size_t>(b)] = theta_star;
      inner_sd[static_cast<std::size_t>(b)] = sd;
      if (t > 0) outer_redraws.fetch_add(t, std::memory_order_relaxed);
      return;
    }
  });
  if (diag) {
    diag->outer_redraws += outer_redraws.load();
    diag->inner_redraws += inner_redraws.load();
  }
}

// Leave-one-out coefficient estimates (BCa acceleration).
inline std::vector<double> jackknife_estimates(const ColMatrix& src, std::int64_t coef) {
  const std::int64_t n = src.n();
  std::vector<double> jack(static_cast<std::size_t>(n));
  OlsKernel kernel;
  std::vector<std::uint32_t> idx(static_cast<std::size_t>(n - 1));
  std::vector<double> beta(static_cast<std::size_t>(src.k()));
  for (std::int64_t drop = 0; drop < n; ++drop) {
    std::int64_t w = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      if (i != drop) idx[static_cast<std::size_t>(w++)] = static_cast<std::uint32_t>(i);
    }
    if (!kernel.factor(src, idx)) {
      throw SingularDesign("jackknife fit singular after dropping row " +
                           std::to_string(drop));
    }
    kernel.extract_beta(beta.data());
    jack[static_cast<std::size_t>(drop)] = beta[static_cast<std::size_t>(coef)];
  }
  return jack;
}

inline void check_coef(const Dataset& data, std::int64_t j) {
  if (j < 0 || j >= data.k()) throw InvalidDataset("coefficient index out of range");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Interval constructions.

inline IntervalEstimate z_interval(const Dataset& data, std::int64_t j, double level) {
  detail::check_coef(data, j);
  const LsFit fit = fit_ols(data);
  const double se = se_for(fit, data, SeVariant::kClassical, j);
  const double z = norm_quantile(1.0 - (1.0 - level) / 2.0);
  const double center = fit.beta[static_cast<std::size_t>(j)];
  return {Method::kZ, level, center - z * se, center + z * se, std::nullopt, false};
}

inline IntervalEstimate sandwich_interval(const Dataset& data, std::int64_t j,
                                          double level, SeVariant variant) {
  detail::check_coef(data, j);
  const LsFit fit = fit_ols(data);
  const double se = se_for(fit, data, variant, j);
  const double z = norm_quantile(1.0 - (1.0 - level) / 2.0);
  const double center = fit.beta[static_cast<std::size_t>(j)];
  Method m = Method::kSandHc0;
  switch (variant) {
    case SeVariant::kHc0: m = Method::kSandHc0; break;
    case SeVariant::kHc1: m = Method::kSandHc1; break;
    case SeVariant::kHc2: m = Method::kSandHc2; break;
    case SeVariant::kHc3: m = Method::kSandHc3; break;
    case SeVariant::kHc4: m = Method::kSandHc4; break;
    case SeVariant::kHc5: m = Method::kSandHc5; break;
    case SeVariant::kClassical: m = Method::kZ; break;
  }
  return {m, level, center - z * se, center + z * se, std::nullopt, false};
}

inline IntervalEstimate percentile_interval(const Dataset& data, std::int64_t j,
                                            double level, const BootConfig& cfg) {
  detail::check_coef(data, j);
  cfg.validate();
  const ColMatrix src(data);
  const std::int64_t coefs[] = {j};
  std::vector<double> theta;
  detail::first_level_estimates(src, coefs, cfg, theta, nullptr);
  const auto [lo, hi] = percentile_endpoints(std::move(theta), level);
  return {Method::kPerc, level, lo, hi, std::nullopt, false};
}

inline IntervalEstimate studentized_interval(const Dataset& data, std::int64_t j,
                                             double level, const BootConfig& cfg) {
  detail::check_coef(data, j);
  cfg.validate();
  const LsFit fit = fit_ols(data);
  const double se = se_for(fit, data, SeVariant::kHc0, j);
  const double center = fit.beta[static_cast<std::size_t>(j)];
  if (se == 0.0) return {Method::kStud, level, center, center, std::nullopt, false};
  const ColMatrix src(data);
  std::vector<double> theta, se_star;
  detail::first_level_studentized(src, j, cfg, theta, se_star, nullptr);
  std::vector<double> tstars(theta.size());
  for (std::size_t b = 0; b < theta.size(); ++b) {
    tstars[b] = (theta[b] - center) / se_star[b];
  }
  const auto [lo, hi] = studentized_endpoints(center, se, std::move(tstars), level);
  return {Method::kStud, level, lo, hi, std::nullopt, false};
}

inline IntervalEstimate boot_t_interval(const Dataset& data, std::int64_t j,
                                        double level, const BootConfig& cfg,
                                        ResampleDiagnostics* diag = nullptr) {
  detail::check_coef(data, j);
  cfg.validate();
  const LsFit fit = fit_ols(data);
  const double se = se_for(fit, data, SeVariant::kHc0, j);
  const double center = fit.beta[static_cast<std::size_t>(j)];
  if (se == 0.0) return {Method::kBootT, level, center, center, std::nullopt, false};
  const ColMatrix src(data);
  std::vector<double> theta, inner_sd;
  detail::nested_sd_sweep(src, j, cfg, theta, inner_sd, diag);
  std::vector<double> tstars(theta.size());
  for (std::size_t b = 0; b < theta.size(); ++b) {
    tstars[b] = (theta[b] - center) / inner_sd[b];
  }
  const auto [lo, hi] = studentized_endpoints(center, se, std::move(tstars), level);
  return {Method::kBootT, level, lo, hi, std::nullopt, false};
}

inline IntervalEstimate bca_interval(const Dataset& data, std::int64_t j, double level,
                                     const BootConfig& cfg) {
  detail::check_coef(data, j);
  cfg.validate();
  const ColMatrix src(data);
  const std::vector<double> base = detail::base_coefficients(src);
  const double theta_hat = base[static_cast<std::size_t>(j)];
  const std::int64_t coefs[] = {j};
  std::vector<double> theta;
  detail::first_level_estimates(src, coefs, cfg, theta, nullptr);
  const std::vector<double> jack = detail::jackknife_estimates(src, j);
  const BcaAdjustment adj = bca_adjustment(theta, theta_hat, jack);
  const auto [lo, hi] = bca_endpoints(std::move(theta), adj, level);
  return {Method::kBca, level, lo, hi, std::nullopt, adj.degenerate};
}

inline BootstrapHistograms compute_histograms(const Dataset& data, std::int64_t j,
                                              const BootConfig& cfg,
                                              ResampleDiagnostics* diag = nullptr) {
  detail::check_coef(data, j);
  cfg.validate();
  const ColMatrix src(data);
  const std::vector<double> base = detail::base_coefficients(src);
  BootstrapHistograms hist;
  hist.theta_hat = base[static_cast<std::size_t>(j)];
  const std::int64_t coefs[] = {j};
  const double theta_hat[] = {hist.theta_hat};
  detail::nested_depth_sweep(src, coefs, theta_hat, cfg, hist.first_level, hist.depths,
                             diag);
  return hist;
}

// Interval assembly from an existing histogram set (shared by the one- and
// two-sided variants and by the batched path).
inline IntervalEstimate perc_cal_from_histograms(const BootstrapHistograms& hist,
                                                 double level, const BootConfig& cfg,
                                                 Sided sided) {
  const double alpha = 1.0 - level;
  const double lambda = calibrate_lambda(hist, alpha, sided, cfg.b2);
  std::vector<double> sorted = hist.first_level;
  std::sort(sorted.begin(), sorted.end());
  IntervalEstimate est;
  est.method = (sided == Sided::kTwo) ? Method::kPercCal2 : Method::kPercCal1;
  est.level = level;
  est.lambda_hat = lambda;
  if (sided == Sided::kTwo) {
    est.lower = quantile_sorted(sorted, 1.0 - lambda);
    est.upper = quantile_sorted(sorted, lambda);
  } else {
    est.lower = -HUGE_VAL;
    est.upper = quantile_sorted(sorted, lambda);
  }
  return est;
}

inline IntervalEstimate perc_cal_interval(const Dataset& data, std::int64_t j,
                                          double level, const BootConfig& cfg,
                                          Sided sided = Sided::kTwo,
                                          ResampleDiagnostics* diag = nullptr) {
  const BootstrapHistograms hist = compute_histograms(data, j, cfg, diag);
  return perc_cal_from_histograms(hist, level, cfg, sided);
}

inline IntervalEstimate compute_interval(const Dataset& data, std::int64_t j,
                                         double level, Method method,
                                         const BootConfig& cfg) {
  switch (method) {
    case Method::kZ: return z_interval(data, j, level);
    case Method::kSandHc0: return sandwich_interval(data, j, level, SeVariant::kHc0);
    case Method::kSandHc1: return sandwich_interval(data, j, level, SeVariant::kHc1);
    case Method::kSandHc2: return sandwich_interval(data, j, level, SeVariant::kHc2);
    case Method::kSandHc3: return sandwich_interval(data, j, level, SeVariant::kHc3);
    case Method::kSandHc4: return sandwich_interval(data, j, level, SeVariant::kHc4);
    case Method::kSandHc5: return sandwich_interval(data, j, level, SeVariant::kHc5);
    case Method::kPerc: return percentile_interval(data, j, level, cfg);
    case Method::kStud: return studentized_interval(data, j, level, cfg);
    case Method::kBootT: return boot_t_interval(data, j, level, cfg);
    case Method::kBca: return bca_interval(data, j, level, cfg);
    case Method::kPercCal2: return perc_cal_interval(data, j, level, cfg, Sided::kTwo);
    case Method::kPercCal1: return perc_cal_interval(data, j, level, cfg, Sided::kOne);
  }
  throw UsageError("unhandled method");
}

// All requested (coefficient, method) intervals with the bootstrap work
// shared where the constructions permit: perc, BCa and the calibrated
// percentile methods accept first-level resamples under the same rule
// (singular only), so one resampling tree serves every coefficient, and the
// results are bit-identical to the single-coefficient entry points. stud and
// boot-t have per-coefficient redraw rules and run per coefficient.
// Returns result[ci][mi] for coefs[ci], methods[mi].
inline std::vector<std::vector<IntervalEstimate>> compute_interval_matrix(
    const Dataset& data, std::span<const std::int64_t> coefs,
    std::span<const Method> methods, double level, const BootConfig& cfg) {
  for (std::int64_t j : coefs) detail::check_coef(data, j);
  const auto ncoef = static_cast<std::int64_t>(coefs.size());
  std::vector<std::vector<IntervalEstimate>> out(
      static_cast<std::size_t>(ncoef),
      std::vector<IntervalEstimate>(methods.size()));

  bool want_perc_cal = false, want_perc = false, want_bca = false;
  for (Method m : methods) {
    want_perc_cal |= (m == Method::kPercCal2 || m == Method::kPercCal1);
    want_perc |= (m == Method::kPerc);
    want_bca |= (m == Method::kBca);
  }

  const ColMatrix src(data);
  std::vector<double> theta_hat;
  if (want_perc_cal || want_bca) {
    const std::vector<double> base = detail::base_coefficients(src);
    theta_hat.reserve(static_cast<std::size_t>(ncoef));
    for (std::int64_t j : coefs) theta_hat.push_back(base[static_cast<std::size_t>(j)]);
  }

  // first_level[b*ncoef + c]; from the nested sweep when calibration needs
  // the second level anyway, otherwise from the cheap sweep. Identical
  // streams and acceptance rule, so identical values.
  std::vector<double> first_level, depths;
  if (want_perc_cal) {
    cfg.validate();
    detail::nested_depth_sweep(src, coefs, theta_hat, cfg, first_level, depths, nullptr);
  } else if (want_perc || want_bca) {
    cfg.validate();
    detail::first_level_estimates(src, coefs, cfg, first_level, nullptr);
  }

  for (std::int64_t ci = 0; ci < ncoef; ++ci) {
    const std::int64_t j = coefs[static_cast<std::size_t>(ci)];
    std::vector<double> theta_j;
    if (!first_level.empty()) {
      theta_j.resize(static_cast<std::size_t>(cfg.b1));
      for (std::int64_t b = 0; b < cfg.b1; ++b) {
        theta_j[static_cast<std::size_t>(b)] =
            first_level[static_cast<std::size_t>(b * ncoef + ci)];
      }
    }
    std::vector<double> jack;
    if (want_bca) jack = detail::jackknife_estimates(src, j);
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      const Method m = methods[mi];
      IntervalEstimate& slot = out[static_cast<std::size_t>(ci)][mi];
      switch (m) {
        case Method::kPerc: {
          const auto [lo, hi] = percentile_endpoints(theta_j, level);
          slot = {Method::kPerc, level, lo, hi, std::nullopt, false};
          break;
        }
        case Method::kBca: {
          const BcaAdjustment adj =
              bca_adjustment(theta_j, theta_hat[static_cast<std::size_t>(ci)], jack);
          const auto [lo, hi] = bca_endpoints(theta_j, adj, level);
          slot = {Method::kBca, level, lo, hi, std::nullopt, adj.degenerate};
          break;
        }
        case Method::kPercCal2:
        case Method::kPercCal1: {
          BootstrapHistograms hist;
          hist.theta_hat = theta_hat[static_cast<std::size_t>(ci)];
          hist.first_level = theta_j;
          hist.depths.resize(static_cast<std::size_t>(cfg.b1));
          for (std::int64_t b = 0; b < cfg.b1; ++b) {
            hist.depths[static_cast<std::size_t>(b)] =
                depths[static_cast<std::size_t>(b * ncoef + ci)];
          }
          slot = perc_cal_from_histograms(
              hist, level, cfg, m == Method::kPercCal2 ? Sided::kTwo : Sided::kOne);
          break;
        }
        default:
          slot = compute_interval(data, j, level, m, cfg);
          break;
      }
    }
  }
  return out;
}

}  // namespace bootci
