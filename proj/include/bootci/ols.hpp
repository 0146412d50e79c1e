// Ordinary least squares for small dense designs, via Householder QR on an
// augmented [X | y] copy, plus the classical and HC0..HC5 sandwich standard
// errors. The kernel is the hot loop of every bootstrap level: it works on a
// reusable column-major scratch, gathers resampled rows by index, and never
// allocates once warm.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "bootci/dataset.hpp"
#include "bootci/errors.hpp"

namespace bootci {

enum class SeVariant { kClassical, kHc0, kHc1, kHc2, kHc3, kHc4, kHc5 };

inline constexpr double kPivotRtol = 1e-12;
inline constexpr double kLeverageTol = 1e-12;

struct LsFit {
  std::vector<double> beta;       // k = p+1 coefficients
  std::vector<double> residuals;  // n
  std::vector<double> leverages;  // n, diagonal of the hat matrix
  std::vector<double> xtx_inv;    // k*k row-major, symmetric positive definite
  double sigma2 = 0.0;            // RSS / (n - k)
};

// Column-major image of a dataset: k design columns followed by y.
class ColMatrix {
 public:
  ColMatrix() = default;
  explicit ColMatrix(const Dataset& d) { load(d); }

  void load(const Dataset& d) {
    n_ = d.n();
    k_ = d.k();
    data_.resize(static_cast<std::size_t>((k_ + 1) * n_));
    for (std::int64_t i = 0; i < n_; ++i) {
      for (std::int64_t j = 0; j < k_; ++j) col(j)[i] = d.x(i, j);
      col(k_)[i] = d.y(i);
    }
  }

  // Rows idx of src (with repetition); sizes to idx.size() rows.
  void gather(const ColMatrix& src, std::span<const std::uint32_t> idx) {
    n_ = static_cast<std::int64_t>(idx.size());
    k_ = src.k_;
    data_.resize(static_cast<std::size_t>((k_ + 1) * n_));
    for (std::int64_t c = 0; c <= k_; ++c) {
      const double* s = src.col(c);
      double* d = col(c);
      for (std::int64_t i = 0; i < n_; ++i) d[i] = s[idx[static_cast<std::size_t>(i)]];
    }
  }

  std::int64_t n() const { return n_; }
  std::int64_t k() const { return k_; }
  double* col(std::int64_t c) { return data_.data() + c * n_; }
  const double* col(std::int64_t c) const { return data_.data() + c * n_; }
  const double* ycol() const { return col(k_); }

 private:
  std::int64_t n_ = 0;
  std::int64_t k_ = 0;
  std::vector<double> data_;
};

namespace detail {

// Fixed-order dot product: four independent partial sums, combined in a
// documented order so every caller sees identical bits.
inline double dot(const double* a, const double* b, std::int64_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

inline void axpy(double alpha, const double* x, double* y, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// Short ascending-index dot for k-length vectors; single accumulator so the
// row-major and column-major callers agree bit for bit.
template <class AtA, class AtB>
inline double dot_k(AtA a, AtB b, std::int64_t k) {
  double s = 0.0;
  for (std::int64_t j = 0; j < k; ++j) s += a(j) * b(j);
  return s;
}

}  // namespace detail

// Reusable QR scratch. factor() gathers (optionally) and factors in place;
// the extract_* members read the factored form.
class OlsKernel {
 public:
  // idx empty means "all rows of src in order".
  bool factor(const ColMatrix& src, std::span<const std::uint32_t> idx) {
    n_ = idx.empty() ? src.n() : static_cast<std::int64_t>(idx.size());
    k_ = src.k();
    a_.resize(static_cast<std::size_t>((k_ + 1) * n_));
    rdiag_.resize(static_cast<std::size_t>(k_));
    for (std::int64_t c = 0; c <= k_; ++c) {
      const double* s = src.col(c);
      double* d = acol(c);
      if (idx.empty()) {
        std::memcpy(d, s, static_cast<std::size_t>(n_) * sizeof(double));
      } else {
        for (std::int64_t i = 0; i < n_; ++i) d[i] = s[idx[static_cast<std::size_t>(i)]];
      }
    }
    return householder();
  }

  std::int64_t n() const { return n_; }
  std::int64_t k() const { return k_; }

  // Back-substitute R beta = Q'y. Valid only after a successful factor().
  void extract_beta(double* beta) const {
    const double* qty = acol(k_);
    for (std::int64_t j = k_ - 1; j >= 0; --j) {
      double s = qty[j];
      for (std::int64_t c = j + 1; c < k_; ++c) s -= acol(c)[j] * beta[c];
      beta[j] = s / rdiag_[static_cast<std::size_t>(j)];
    }
  }

  // (X'X)^-1 = R^-1 R^-T, written row-major into minv (k*k).
  void extract_xtx_inv(double* minv) const {
    const std::int64_t k = k_;
    tinv_.assign(static_cast<std::size_t>(k * k), 0.0);
    // T = R^-1, upper triangular, column by column.
    for (std::int64_t j = 0; j < k; ++j) {
      tinv_[static_cast<std::size_t>(j * k + j)] = 1.0 / rdiag_[static_cast<std::size_t>(j)];
      for (std::int64_t i = j - 1; i >= 0; --i) {
        double s = 0.0;
        for (std::int64_t c = i + 1; c <= j; ++c) {
          s += acol(c)[i] * tinv_[static_cast<std::size_t>(c * k + j)];
        }
        tinv_[static_cast<std::size_t>(i * k + j)] = -s / rdiag_[static_cast<std::size_t>(i)];
      }
    }
    for (std::int64_t i = 0; i < k; ++i) {
      for (std::int64_t j = i; j < k; ++j) {
        double s = 0.0;
        for (std::int64_t c = j; c < k; ++c) {
          s += tinv_[static_cast<std::size_t>(i * k + c)] * tinv_[static_cast<std::size_t>(j * k + c)];
        }
        minv[i * k + j] = s;
        minv[j * k + i] = s;
      }
    }
  }

 private:
  double* acol(std::int64_t c) { return a_.data() + c * n_; }
  const double* acol(std::int64_t c) const { return a_.data() + c * n_; }

  bool householder() {
    const std::int64_t k = k_, n = n_;
    if (n < k + 1) return false;  // fit-grade size requirement n >= p+2
    for (std::int64_t j = 0; j < k; ++j) {
      double* cj = acol(j);
      const std::int64_t len = n - j;
      const double sigma = detail::dot(cj + j, cj + j, len);
      if (sigma == 0.0 || !std::isfinite(sigma)) {
        rdiag_[static_cast<std::size_t>(j)] = 0.0;
        continue;  // pivot test below rejects the factorization
      }
      const double norm = std::sqrt(sigma);
      const double alpha = (cj[j] > 0.0) ? -norm : norm;
      cj[j] -= alpha;  // reflector v lives in rows j..n-1 of column j
      rdiag_[static_cast<std::size_t>(j)] = alpha;
      const double vtv = -2.0 * alpha * cj[j];  // = v'v
      const double scale = -2.0 / vtv;
      for (std::int64_t c = j + 1; c <= k; ++c) {
        double* cc = acol(c);
        const double w = detail::dot(cj + j, cc + j, len);
        detail::axpy(scale * w, cj + j, cc + j, len);
      }
    }
    double dmax = 0.0, dmin = HUGE_VAL;
    for (std::int64_t j = 0; j < k; ++j) {
      const double d = std::fabs(rdiag_[static_cast<std::size_t>(j)]);
      if (!std::isfinite(d)) return false;
      dmax = std::max(dmax, d);
      dmin = std::min(dmin, d);
    }
    return dmax > 0.0 && dmin > kPivotRtol * dmax;
  }

  std::int64_t n_ = 0;
  std::int64_t k_ = 0;
  std::vector<double> a_;       // augmented [X | y], column-major, factored in place
  std::vector<double> rdiag_;   // R diagonal (the pivots)
  mutable std::vector<double> tinv_;
};

namespace detail {

// h_i = x_i' (X'X)^-1 x_i with a fixed accumulation order.
template <class RowAt>
inline double leverage_of_row(RowAt x, const double* minv, std::int64_t k) {
  double h = 0.0;
  for (std::int64_t a = 0; a < k; ++a) {
    double inner = 0.0;
    for (std::int64_t b = 0; b < k; ++b) inner += minv[a * k + b] * x(b);
    h += x(a) * inner;
  }
  return h;
}

}  // namespace detail

// Exact OLS fit; throws SingularDesign when the pivot test fails and
// InvalidDataset when n < p+2.
inline LsFit fit_ols(const Dataset& data) {
  const std::int64_t n = data.n(), k = data.k();
  if (n < k + 1) throw InvalidDataset("need n >= p+2 rows to fit");
  ColMatrix m(data);
  OlsKernel kernel;
  if (!kernel.factor(m, {})) throw SingularDesign("X'X pivot below threshold");
  LsFit fit;
  fit.beta.resize(static_cast<std::size_t>(k));
  kernel.extract_beta(fit.beta.data());
  fit.xtx_inv.resize(static_cast<std::size_t>(k * k));
  kernel.extract_xtx_inv(fit.xtx_inv.data());
  fit.residuals.resize(static_cast<std::size_t>(n));
  fit.leverages.resize(static_cast<std::size_t>(n));
  double rss = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const auto xi = [&](std::int64_t j) { return data.x(i, j); };
    const double fitted = detail::dot_k(xi, [&](std::int64_t j) { return fit.beta[static_cast<std::size_t>(j)]; }, k);
    const double e = data.y(i) - fitted;
    fit.residuals[static_cast<std::size_t>(i)] = e;
    rss += e * e;
    fit.leverages[static_cast<std::size_t>(i)] = detail::leverage_of_row(xi, fit.xtx_inv.data(), k);
  }
  fit.sigma2 = rss / static_cast<double>(n - k);
  return fit;
}

// Hat-matrix diagonal recomputed from the fit; equals fit.leverages.
inline std::vector<double> leverages(const LsFit& fit, const Dataset& data) {
  const std::int64_t n = data.n(), k = data.k();
  std::vector<double> h(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const auto xi = [&](std::int64_t j) { return data.x(i, j); };
    h[static_cast<std::size_t>(i)] = detail::leverage_of_row(xi, fit.xtx_inv.data(), k);
  }
  return h;
}

namespace detail {

// HC residual weight e_i^2 * c_i for one observation.
inline double hc_weight(SeVariant v, double e, double h, std::int64_t n,
                        std::int64_t k, double hmax) {
  const double e2 = e * e;
  switch (v) {
    case SeVariant::kHc0:
      return e2;
    case SeVariant::kHc1:
      return e2 * (static_cast<double>(n) / static_cast<double>(n - k));
    case SeVariant::kHc2:
      return e2 / (1.0 - h);
    case SeVariant::kHc3:
      return e2 / ((1.0 - h) * (1.0 - h));
    case SeVariant::kHc4: {
      const double delta = std::min(4.0, static_cast<double>(n) * h / static_cast<double>(k));
      return e2 * std::pow(1.0 - h, -delta);
    }
    case SeVariant::kHc5: {
      const double cap = std::max(4.0, 0.7 * static_cast<double>(n) * hmax / static_cast<double>(k));
      const double gamma = std::min(static_cast<double>(n) * h / static_cast<double>(k), cap);
      return e2 * std::pow(1.0 - h, -gamma);
    }
    default:
      return e2;
  }
}

// j-th diagonal of (X'X)^-1 X' diag(w) X (X'X)^-1 with w_i = e_i^2 c_i.
// The projection trick: that diagonal is sum_i w_i (x_i . u)^2 where u is
// row j of (X'X)^-1.
template <class RowAt>
inline double sandwich_jj(RowAt row_at, const double* e, const double* h,
                          const double* minv, std::int64_t n, std::int64_t k,
                          std::int64_t j, SeVariant v) {
  const double* u = minv + j * k;
  double hmax = 0.0;
  if (v == SeVariant::kHc5) {
    for (std::int64_t i = 0; i < n; ++i) hmax = std::max(hmax, h[i]);
  }
  double s = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double t = dot_k([&](std::int64_t c) { return row_at(i, c); },
                           [&](std::int64_t c) { return u[c]; }, k);
    const double w = hc_weight(v, e[i], h[i], n, k, hmax);
    s += w * (t * t);
  }
  return s;
}

inline bool needs_leverage(SeVariant v) {
  return v == SeVariant::kHc2 || v == SeVariant::kHc3 || v == SeVariant::kHc4 ||
         v == SeVariant::kHc5;
}

}  // namespace detail

// Standard error of coefficient coef_index under the requested variant.
inline double se_for(const LsFit& fit, const Dataset& data, SeVariant variant,
                     std::int64_t coef_index) {
  const std::int64_t n = data.n(), k = data.k();
  if (coef_index < 0 || coef_index >= k) throw InvalidDataset("coefficient index out of range");
  if (variant == SeVariant::kClassical) {
    return std::sqrt(fit.sigma2 * fit.xtx_inv[static_cast<std::size_t>(coef_index * k + coef_index)]);
  }
  if (detail::needs_leverage(variant)) {
    for (double h : fit.leverages) {
      if (h >= 1.0 - kLeverageTol) {
        throw LeverageOne("leverage numerically 1; HC2..HC5 undefined");
      }
    }
  }
  const double s = detail::sandwich_jj([&](std::int64_t i, std::int64_t c) { return data.x(i, c); },
                                       fit.residuals.data(), fit.leverages.data(),
                                       fit.xtx_inv.data(), n, k, coef_index, variant);
  return std::sqrt(s);
}

}  // namespace bootci
