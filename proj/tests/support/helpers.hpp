// Shared test fixtures and generators.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "bootci/dataset.hpp"
#include "bootci/rng.hpp"

namespace testsup {

// Simple-regression dataset with normal x and t-ish noise; always fittable
// for n >= 3.
inline bootci::Dataset random_dataset(std::uint64_t seed, std::int64_t n,
                                      double slope = 1.0, double noise_sd = 1.0) {
  bootci::Stream s(bootci::StreamKey::root(seed));
  std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] = s.next_normal();
    y[static_cast<std::size_t>(i)] =
        0.5 + slope * x[static_cast<std::size_t>(i)] + noise_sd * s.next_normal();
  }
  return bootci::Dataset::from_covariates({x}, y);
}

// Multi-covariate dataset (p columns), mildly heteroskedastic.
inline bootci::Dataset random_dataset_p(std::uint64_t seed, std::int64_t n,
                                        std::int64_t p) {
  bootci::Stream s(bootci::StreamKey::root(seed));
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(p),
                                        std::vector<double>(static_cast<std::size_t>(n)));
  std::vector<double> y(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    double mean = 0.3;
    for (std::int64_t c = 0; c < p; ++c) {
      const double v = s.next_normal();
      cols[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] = v;
      mean += 0.5 * v / static_cast<double>(c + 1);
    }
    y[static_cast<std::size_t>(i)] =
        mean + (0.5 + 0.2 * std::fabs(cols[0][static_cast<std::size_t>(i)])) * s.next_normal();
  }
  return bootci::Dataset::from_covariates(cols, y);
}

// The worked 3-point fixture: x = (1,2,3), y = (1,2,4).
inline bootci::Dataset hand_fixture() {
  return bootci::Dataset::from_covariates({{1.0, 2.0, 3.0}}, {1.0, 2.0, 4.0});
}

// Exact line y = 2x: every resample interpolates it.
inline bootci::Dataset zero_noise_line(std::int64_t n = 8) {
  std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] = static_cast<double>(i + 1);
    y[static_cast<std::size_t>(i)] = 2.0 * static_cast<double>(i + 1);
  }
  return bootci::Dataset::from_covariates({x}, y);
}

}  // namespace testsup
