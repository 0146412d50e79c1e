// Slow, by-the-book reference constructions of the bootstrap intervals.
// They replay the same derived streams as the production paths but build
// everything from whole materialized datasets and the public single-call
// primitives (pairs_resample, fit_ols, se_for, empirical_quantile), with no
// index composition, no parallelism and no incremental counting. Production
// output must match these bit for bit.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "bootci/intervals.hpp"
#include "bootci/resample.hpp"
#include "bootci/rng.hpp"

namespace refimpl {

using namespace bootci;

inline Dataset resample_at(const Dataset& d, const BootConfig& cfg,
                           std::initializer_list<std::int64_t> path) {
  Stream s(make_key(cfg.master_seed, path));
  return pairs_resample(d, s);
}

inline bool fits(const Dataset& d, LsFit* out) {
  try {
    LsFit f = fit_ols(d);
    if (out) *out = std::move(f);
    return true;
  } catch (const SingularDesign&) {
    return false;
  }
}

// First-level slot b: attempts t = 0, 1, ... with stream [1, t*B1 + b].
// accept() may reject an otherwise fittable resample (zero-se rules).
template <class Accept>
inline std::pair<Dataset, std::int64_t> first_level_slot(const Dataset& data,
                                                         const BootConfig& cfg,
                                                         std::int64_t slot,
                                                         Accept&& accept) {
  for (std::int64_t t = 0;; ++t) {
    if (t > cfg.max_redraws) {
      throw TooManyDegenerateResamples("reference: first-level slot");
    }
    Dataset r = resample_at(data, cfg, {kCtxBootstrap, t * cfg.b1 + slot});
    if (accept(r)) return {std::move(r), t * cfg.b1 + slot};
  }
}

// Second-level slot c under outer path T: attempts s with [1, T, s*B2 + c].
inline Dataset second_level_slot(const Dataset& outer, const BootConfig& cfg,
                                 std::int64_t outer_path, std::int64_t slot) {
  for (std::int64_t s = 0;; ++s) {
    if (s > cfg.max_redraws) {
      throw TooManyDegenerateResamples("reference: second-level slot");
    }
    Dataset r = resample_at(outer, cfg, {kCtxBootstrap, outer_path, s * cfg.b2 + slot});
    if (fits(r, nullptr)) return r;
  }
}

inline std::vector<double> first_level_thetas(const Dataset& data, std::int64_t j,
                                              const BootConfig& cfg) {
  std::vector<double> thetas;
  for (std::int64_t b = 0; b < cfg.b1; ++b) {
    auto [r, path] = first_level_slot(data, cfg, b,
                                      [](const Dataset& d) { return fits(d, nullptr); });
    thetas.push_back(fit_ols(r).beta[static_cast<std::size_t>(j)]);
  }
  return thetas;
}

inline IntervalEstimate percentile(const Dataset& data, std::int64_t j, double level,
                                   const BootConfig& cfg) {
  const double alpha = 1.0 - level;
  const std::vector<double> thetas = first_level_thetas(data, j, cfg);
  IntervalEstimate est;
  est.method = Method::kPerc;
  est.level = level;
  est.lower = empirical_quantile(thetas, alpha / 2.0);
  est.upper = empirical_quantile(thetas, 1.0 - alpha / 2.0);
  return est;
}

inline IntervalEstimate studentized(const Dataset& data, std::int64_t j, double level,
                                    const BootConfig& cfg) {
  const double alpha = 1.0 - level;
  const LsFit fit0 = fit_ols(data);
  const double se0 = se_for(fit0, data, SeVariant::kHc0, j);
  const double center = fit0.beta[static_cast<std::size_t>(j)];
  IntervalEstimate est;
  est.method = Method::kStud;
  est.level = level;
  if (se0 == 0.0) {
    est.lower = est.upper = center;
    return est;
  }
  std::vector<double> tstars;
  for (std::int64_t b = 0; b < cfg.b1; ++b) {
    LsFit fit_r;
    double se_r = 0.0;
    auto [r, path] = first_level_slot(data, cfg, b, [&](const Dataset& d) {
      if (!fits(d, &fit_r)) return false;
      se_r = se_for(fit_r, d, SeVariant::kHc0, j);
      return se_r != 0.0;
    });
    tstars.push_back((fit_r.beta[static_cast<std::size_t>(j)] - center) / se_r);
  }
  std::vector<double> sorted = tstars;
  const double t_lo = empirical_quantile(sorted, alpha / 2.0);
  const double t_hi = empirical_quantile(sorted, 1.0 - alpha / 2.0);
  est.lower = center - se0 * t_hi;
  est.upper = center - se0 * t_lo;
  return est;
}

inline IntervalEstimate boot_t(const Dataset& data, std::int64_t j, double level,
                               const BootConfig& cfg) {
  const double alpha = 1.0 - level;
  const LsFit fit0 = fit_ols(data);
  const double se0 = se_for(fit0, data, SeVariant::kHc0, j);
  const double center = fit0.beta[static_cast<std::size_t>(j)];
  IntervalEstimate est;
  est.method = Method::kBootT;
  est.level = level;
  if (se0 == 0.0) {
    est.lower = est.upper = center;
    return est;
  }
  std::vector<double> tstars;
  for (std::int64_t b = 0; b < cfg.b1; ++b) {
    for (std::int64_t t = 0;; ++t) {
      if (t > cfg.max_redraws) {
        throw TooManyDegenerateResamples("reference: boot-t outer slot");
      }
      const std::int64_t outer_path = t * cfg.b1 + b;
      Dataset r = resample_at(data, cfg, {kCtxBootstrap, outer_path});
      LsFit fit_r;
      if (!fits(r, &fit_r)) continue;
      std::vector<double> inner;
      for (std::int64_t c = 0; c < cfg.b2; ++c) {
        const Dataset rr = second_level_slot(r, cfg, outer_path, c);
        inner.push_back(fit_ols(rr).beta[static_cast<std::size_t>(j)]);
      }
      const double sd = sample_sd(inner);
      if (sd == 0.0) continue;  // redraw the outer resample
      tstars.push_back((fit_r.beta[static_cast<std::size_t>(j)] - center) / sd);
      break;
    }
  }
  std::vector<double> sorted = tstars;
  const double t_lo = empirical_quantile(sorted, alpha / 2.0);
  const double t_hi = empirical_quantile(sorted, 1.0 - alpha / 2.0);
  est.lower = center - se0 * t_hi;
  est.upper = center - se0 * t_lo;
  return est;
}

inline IntervalEstimate bca(const Dataset& data, std::int64_t j, double level,
                            const BootConfig& cfg) {
  const double alpha = 1.0 - level;
  const LsFit fit0 = fit_ols(data);
  const double theta_hat = fit0.beta[static_cast<std::size_t>(j)];
  const std::vector<double> thetas = first_level_thetas(data, j, cfg);

  // Jackknife on materialized leave-one-out datasets.
  const std::int64_t n = data.n(), k = data.k();
  std::vector<double> jack;
  for (std::int64_t drop = 0; drop < n; ++drop) {
    std::vector<double> design;
    std::vector<double> y;
    for (std::int64_t i = 0; i < n; ++i) {
      if (i == drop) continue;
      for (std::int64_t c = 0; c < k; ++c) design.push_back(data.x(i, c));
      y.push_back(data.y(i));
    }
    jack.push_back(fit_ols(Dataset(std::move(design), std::move(y), k))
                       .beta[static_cast<std::size_t>(j)]);
  }

  IntervalEstimate est;
  est.method = Method::kBca;
  est.level = level;
  std::int64_t below = 0;
  for (double v : thetas) below += (v < theta_hat);
  if (below == 0 || below == cfg.b1) {
    est.degenerate_bias = true;
    est.lower = empirical_quantile(thetas, alpha / 2.0);
    est.upper = empirical_quantile(thetas, 1.0 - alpha / 2.0);
    return est;
  }
  const double z0 = norm_quantile(static_cast<double>(below) / static_cast<double>(cfg.b1));
  const double m = mean_of(jack);
  double num = 0.0, den = 0.0;
  for (double v : jack) {
    const double d = m - v;
    num += d * d * d;
    den += d * d;
  }
  const double a = (den > 0.0) ? num / (6.0 * std::pow(den, 1.5)) : 0.0;
  const auto adjusted = [&](double z) {
    const double zz = z0 + z;
    const double q = norm_cdf(z0 + zz / (1.0 - a * zz));
    return std::clamp(q, 1e-300, 1.0 - 1e-16);
  };
  const double a1 = adjusted(norm_quantile(alpha / 2.0));
  const double a2 = adjusted(norm_quantile(1.0 - alpha / 2.0));
  const double e1 = empirical_quantile(thetas, a1);
  const double e2 = empirical_quantile(thetas, a2);
  est.lower = std::min(e1, e2);
  est.upper = std::max(e1, e2);
  return est;
}

inline BootstrapHistograms histograms(const Dataset& data, std::int64_t j,
                                      const BootConfig& cfg) {
  BootstrapHistograms hist;
  hist.theta_hat = fit_ols(data).beta[static_cast<std::size_t>(j)];
  for (std::int64_t b = 0; b < cfg.b1; ++b) {
    auto [r, outer_path] = first_level_slot(
        data, cfg, b, [](const Dataset& d) { return fits(d, nullptr); });
    hist.first_level.push_back(fit_ols(r).beta[static_cast<std::size_t>(j)]);
    std::vector<double> inner;
    for (std::int64_t c = 0; c < cfg.b2; ++c) {
      const Dataset rr = second_level_slot(r, cfg, outer_path, c);
      inner.push_back(fit_ols(rr).beta[static_cast<std::size_t>(j)]);
    }
    hist.depths.push_back(ecdf_position(inner, hist.theta_hat));
  }
  return hist;
}

inline IntervalEstimate perc_cal(const Dataset& data, std::int64_t j, double level,
                                 const BootConfig& cfg, Sided sided) {
  const double alpha = 1.0 - level;
  const BootstrapHistograms hist = histograms(data, j, cfg);
  std::vector<double> d = hist.depths;
  if (sided == Sided::kTwo) {
    for (double& q : d) q = std::max(q, 1.0 - q);
  }
  double lambda = empirical_quantile(d, 1.0 - alpha);
  const double half_cell = 1.0 / (2.0 * static_cast<double>(cfg.b2));
  lambda = std::clamp(lambda, 0.5 + half_cell, 1.0 - half_cell);
  IntervalEstimate est;
  est.method = (sided == Sided::kTwo) ? Method::kPercCal2 : Method::kPercCal1;
  est.level = level;
  est.lambda_hat = lambda;
  if (sided == Sided::kTwo) {
    est.lower = empirical_quantile(hist.first_level, 1.0 - lambda);
    est.upper = empirical_quantile(hist.first_level, lambda);
  } else {
    est.lower = -HUGE_VAL;
    est.upper = empirical_quantile(hist.first_level, lambda);
  }
  return est;
}

}  // namespace refimpl
