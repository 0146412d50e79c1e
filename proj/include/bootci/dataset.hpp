// Regression data: a response vector plus a row-major design matrix whose
// first column is an all-ones intercept.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bootci/errors.hpp"

namespace bootci {

class Dataset {
 public:
  // design is row-major n x k with k = p+1 fitted columns, column 0 all ones.
  // Structural checks run here; the fit-grade size requirement (n >= k+1) is
  // checked by fit_ols so that resampling can pass small datasets through.
  Dataset(std::vector<double> design, std::vector<double> response,
          std::int64_t ncols, std::vector<std::string> coef_names = {})
      : design_(std::move(design)),
        y_(std::move(response)),
        k_(ncols),
        names_(std::move(coef_names)) {
    if (k_ < 1 || design_.size() % static_cast<std::size_t>(k_) != 0) {
      throw InvalidDataset("design size is not a multiple of the column count");
    }
    n_ = static_cast<std::int64_t>(design_.size()) / k_;
    if (n_ < 1) throw InvalidDataset("dataset has no rows");
    if (static_cast<std::int64_t>(y_.size()) != n_) {
      throw InvalidDataset("response length does not match the design");
    }
    for (std::int64_t i = 0; i < n_; ++i) {
      if (design_[static_cast<std::size_t>(i * k_)] != 1.0) {
        throw InvalidDataset("column 0 must be an all-ones intercept");
      }
    }
    for (double v : design_) {
      if (!std::isfinite(v)) throw InvalidDataset("non-finite design entry");
    }
    for (double v : y_) {
      if (!std::isfinite(v)) throw InvalidDataset("non-finite response entry");
    }
    if (names_.empty()) {
      names_.reserve(static_cast<std::size_t>(k_));
      names_.push_back("(intercept)");
      for (std::int64_t j = 1; j < k_; ++j) names_.push_back("x" + std::to_string(j));
    } else if (static_cast<std::int64_t>(names_.size()) != k_) {
      throw InvalidDataset("coefficient name count does not match the design");
    }
  }

  // Covariate columns only; the intercept is prepended here.
  static Dataset from_covariates(const std::vector<std::vector<double>>& cols,
                                 std::vector<double> response,
                                 std::vector<std::string> names = {}) {
    const std::int64_t n = static_cast<std::int64_t>(response.size());
    const std::int64_t k = static_cast<std::int64_t>(cols.size()) + 1;
    std::vector<double> design(static_cast<std::size_t>(n * k));
    for (std::int64_t i = 0; i < n; ++i) {
      design[static_cast<std::size_t>(i * k)] = 1.0;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (static_cast<std::int64_t>(cols[c].size()) != n) {
          throw InvalidDataset("covariate column length mismatch");
        }
        design[static_cast<std::size_t>(i * k) + 1 + c] = cols[c][static_cast<std::size_t>(i)];
      }
    }
    std::vector<std::string> coef_names;
    if (!names.empty()) {
      coef_names.push_back("(intercept)");
      for (auto& s : names) coef_names.push_back(std::move(s));
    }
    return Dataset(std::move(design), std::move(response), k, std::move(coef_names));
  }

  std::int64_t n() const { return n_; }
  std::int64_t k() const { return k_; }   // fitted columns, p+1
  std::int64_t p() const { return k_ - 1; }

  double x(std::int64_t i, std::int64_t j) const {
    return design_[static_cast<std::size_t>(i * k_ + j)];
  }
  double y(std::int64_t i) const { return y_[static_cast<std::size_t>(i)]; }

  std::span<const double> row(std::int64_t i) const {
    return {design_.data() + i * k_, static_cast<std::size_t>(k_)};
  }
  const std::vector<double>& design() const { return design_; }
  const std::vector<double>& response() const { return y_; }
  const std::vector<std::string>& coef_names() const { return names_; }

 private:
  std::vector<double> design_;  // row-major n*k
  std::vector<double> y_;
  std::int64_t n_ = 0;
  std::int64_t k_ = 0;
  std::vector<std::string> names_;
};

}  // namespace bootci
