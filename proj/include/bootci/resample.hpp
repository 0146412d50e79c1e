// Pairs bootstrap and the quantile/ECDF conventions shared by every
// interval method.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "bootci/dataset.hpp"
#include "bootci/errors.hpp"
#include "bootci/rng.hpp"

namespace bootci {

// n uniform draws with replacement from {0..n-1}; the one primitive every
// bootstrap level uses, so fast paths and reference paths see identical
// index sequences from identical streams.
inline void resample_indices(Stream& stream, std::int64_t n,
                             std::vector<std::uint32_t>& out) {
  out.resize(static_cast<std::size_t>(n));
  for (auto& v : out) {
    v = static_cast<std::uint32_t>(stream.next_below(static_cast<std::uint64_t>(n)));
  }
}

// Whole-row resample: (x, y) pairs stay together.
inline Dataset pairs_resample(const Dataset& data, Stream& stream) {
  std::vector<std::uint32_t> idx;
  resample_indices(stream, data.n(), idx);
  const std::int64_t k = data.k();
  std::vector<double> design(static_cast<std::size_t>(data.n() * k));
  std::vector<double> y(static_cast<std::size_t>(data.n()));
  for (std::int64_t i = 0; i < data.n(); ++i) {
    const auto r = data.row(idx[static_cast<std::size_t>(i)]);
    std::copy(r.begin(), r.end(), design.begin() + i * k);
    y[static_cast<std::size_t>(i)] = data.y(idx[static_cast<std::size_t>(i)]);
  }
  return Dataset(std::move(design), std::move(y), k, data.coef_names());
}

namespace detail {

// 1-based order-statistic index ceil(q*B), with a small absolute nudge so a
// product like 0.05*300 that lands a hair above the exact integer through
// floating point still selects the intended order statistic.
inline std::int64_t quantile_index(double q, std::int64_t b) {
  const double t = q * static_cast<double>(b);
  auto i = static_cast<std::int64_t>(std::ceil(t - 1e-9));
  return std::clamp<std::int64_t>(i, 1, b);
}

}  // namespace detail

// Ceiling order statistic x_(ceil(qB)) of a sorted ascending sample.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw EmptySample("quantile of an empty sample");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile level must be in (0,1)");
  const auto i = detail::quantile_index(q, static_cast<std::int64_t>(sorted.size()));
  return sorted[static_cast<std::size_t>(i - 1)];
}

// Ceiling order statistic of an unsorted multiset; the result is always an
// element of the sample (no interpolation).
inline double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw EmptySample("quantile of an empty sample");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile level must be in (0,1)");
  const auto i = detail::quantile_index(q, static_cast<std::int64_t>(values.size()));
  std::nth_element(values.begin(), values.begin() + (i - 1), values.end());
  return values[static_cast<std::size_t>(i - 1)];
}

// ECDF position #{v <= x} / B; ties count as covered.
inline double ecdf_position(std::span<const double> values, double x) {
  if (values.empty()) throw EmptySample("ECDF of an empty sample");
  std::int64_t count = 0;
  for (double v : values) count += (v <= x);
  return static_cast<double>(count) / static_cast<double>(values.size());
}

}  // namespace bootci
