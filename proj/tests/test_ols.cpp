#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "bootci/dataset.hpp"
#include "bootci/ols.hpp"
#include "support/dense_oracle.hpp"
#include "support/helpers.hpp"

using namespace bootci;

TEST_CASE("hand fixture: slope 1.5, intercept -2/3") {
  const Dataset d = testsup::hand_fixture();
  const LsFit fit = fit_ols(d);
  CHECK(fit.beta[1] == Catch::Approx(1.5).epsilon(1e-13));
  CHECK(fit.beta[0] == Catch::Approx(-2.0 / 3.0).epsilon(1e-13));
  CHECK(fit.sigma2 == Catch::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(fit.leverages[0] == Catch::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(fit.leverages[1] == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(fit.leverages[2] == Catch::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(se_for(fit, d, SeVariant::kClassical, 1) ==
        Catch::Approx(std::sqrt(1.0 / 12.0)).epsilon(1e-12));
}

TEST_CASE("exact line: slope 2, zero residuals, zero standard errors") {
  const Dataset d = testsup::zero_noise_line(9);
  const LsFit fit = fit_ols(d);
  CHECK(fit.beta[1] == Catch::Approx(2.0).margin(1e-12));
  CHECK(fit.beta[0] == Catch::Approx(0.0).margin(1e-12));
  for (double e : fit.residuals) CHECK(std::fabs(e) < 1e-12);
  for (SeVariant v : {SeVariant::kClassical, SeVariant::kHc0, SeVariant::kHc1,
                      SeVariant::kHc2, SeVariant::kHc3, SeVariant::kHc4, SeVariant::kHc5}) {
    CHECK(se_for(fit, d, v, 1) < 1e-12);
  }
}

TEST_CASE("duplicating every row leaves the coefficients unchanged") {
  const Dataset d = testsup::random_dataset(31, 11);
  std::vector<double> design2;
  std::vector<double> y2;
  for (int rep = 0; rep < 2; ++rep) {
    for (std::int64_t i = 0; i < d.n(); ++i) {
      for (std::int64_t j = 0; j < d.k(); ++j) design2.push_back(d.x(i, j));
      y2.push_back(d.y(i));
    }
  }
  const Dataset stacked(std::move(design2), std::move(y2), d.k());
  const LsFit a = fit_ols(d);
  const LsFit b = fit_ols(stacked);
  CHECK(b.beta[0] == Catch::Approx(a.beta[0]).epsilon(1e-11));
  CHECK(b.beta[1] == Catch::Approx(a.beta[1]).epsilon(1e-11));
}

TEST_CASE("matches the centered-sums closed form on 1000 random datasets") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Dataset d = testsup::random_dataset(seed, 5 + static_cast<std::int64_t>(seed % 20));
    double sx = 0, sy = 0;
    for (std::int64_t i = 0; i < d.n(); ++i) {
      sx += d.x(i, 1);
      sy += d.y(i);
    }
    const double xbar = sx / static_cast<double>(d.n());
    const double ybar = sy / static_cast<double>(d.n());
    double sxy = 0, sxx = 0;
    for (std::int64_t i = 0; i < d.n(); ++i) {
      sxy += (d.x(i, 1) - xbar) * (d.y(i) - ybar);
      sxx += (d.x(i, 1) - xbar) * (d.x(i, 1) - xbar);
    }
    const double slope = sxy / sxx;
    const double intercept = ybar - slope * xbar;
    const LsFit fit = fit_ols(d);
    REQUIRE(std::fabs(fit.beta[1] - slope) < 1e-10);
    REQUIRE(std::fabs(fit.beta[0] - intercept) < 1e-10);
  }
}

TEST_CASE("dense-matrix oracle agrees on fits, leverages and all SEs") {
  const std::vector<SeVariant> variants = {
      SeVariant::kClassical, SeVariant::kHc0, SeVariant::kHc1, SeVariant::kHc2,
      SeVariant::kHc3,       SeVariant::kHc4, SeVariant::kHc5};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::int64_t n = 5 + static_cast<std::int64_t>(seed % 8);  // up to 12
    const Dataset d = testsup::random_dataset(seed * 7 + 1, n);
    const LsFit fit = fit_ols(d);
    const dense_oracle::Fit ref = dense_oracle::fit(d);
    for (std::int64_t j = 0; j < d.k(); ++j) {
      REQUIRE(std::fabs(fit.beta[static_cast<std::size_t>(j)] -
                        ref.beta[static_cast<std::size_t>(j)]) < 1e-10);
    }
    for (std::int64_t i = 0; i < d.n(); ++i) {
      REQUIRE(std::fabs(fit.leverages[static_cast<std::size_t>(i)] -
                        ref.leverages[static_cast<std::size_t>(i)]) < 1e-10);
    }
    for (SeVariant v : variants) {
      for (std::int64_t j = 0; j < d.k(); ++j) {
        REQUIRE(std::fabs(se_for(fit, d, v, j) - dense_oracle::se(d, ref, v, j)) < 1e-10);
      }
    }
  }
}

TEST_CASE("fit invariants hold on random fits") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::int64_t p = 1 + static_cast<std::int64_t>(seed % 3);
    const Dataset d = testsup::random_dataset_p(seed + 11, 10 + static_cast<std::int64_t>(seed % 30), p);
    const LsFit fit = fit_ols(d);
    // X'e = 0 within 1e-8 * ||y||
    double ynorm = 0.0;
    for (std::int64_t i = 0; i < d.n(); ++i) ynorm += d.y(i) * d.y(i);
    ynorm = std::sqrt(ynorm);
    for (std::int64_t j = 0; j < d.k(); ++j) {
      double dotp = 0.0;
      for (std::int64_t i = 0; i < d.n(); ++i) {
        dotp += d.x(i, j) * fit.residuals[static_cast<std::size_t>(i)];
      }
      REQUIRE(std::fabs(dotp) <= 1e-8 * ynorm);
    }
    double trace = 0.0;
    for (double h : fit.leverages) {
      REQUIRE(h >= -1e-12);
      REQUIRE(h <= 1.0 + 1e-12);
      trace += h;
    }
    REQUIRE(std::fabs(trace - static_cast<double>(d.k())) < 1e-8);
    // xtx_inv symmetric positive definite: diagonal positive, symmetry exact
    for (std::int64_t a = 0; a < d.k(); ++a) {
      REQUIRE(fit.xtx_inv[static_cast<std::size_t>(a * d.k() + a)] > 0.0);
      for (std::int64_t b = 0; b < d.k(); ++b) {
        REQUIRE(fit.xtx_inv[static_cast<std::size_t>(a * d.k() + b)] ==
                fit.xtx_inv[static_cast<std::size_t>(b * d.k() + a)]);
      }
    }
    // leverages() free function recomputes the stored field bit for bit
    const std::vector<double> h2 = leverages(fit, d);
    for (std::int64_t i = 0; i < d.n(); ++i) {
      REQUIRE(h2[static_cast<std::size_t>(i)] == fit.leverages[static_cast<std::size_t>(i)]);
    }
  }
}

TEST_CASE("affine equivariance") {
  const Dataset d = testsup::random_dataset_p(5, 40, 2);
  const LsFit base = fit_ols(d);
  const double a = 1.7, c = -0.9;
  // y' = a*y + c*x1
  std::vector<double> y2(static_cast<std::size_t>(d.n()));
  for (std::int64_t i = 0; i < d.n(); ++i) y2[static_cast<std::size_t>(i)] = a * d.y(i) + c * d.x(i, 1);
  const Dataset d2(std::vector<double>(d.design()), std::move(y2), d.k());
  const LsFit fit2 = fit_ols(d2);
  CHECK(fit2.beta[0] == Catch::Approx(a * base.beta[0]).margin(1e-10));
  CHECK(fit2.beta[1] == Catch::Approx(a * base.beta[1] + c).margin(1e-10));
  CHECK(fit2.beta[2] == Catch::Approx(a * base.beta[2]).margin(1e-10));
  for (SeVariant v : {SeVariant::kClassical, SeVariant::kHc0, SeVariant::kHc3, SeVariant::kHc5}) {
    for (std::int64_t j = 0; j < d.k(); ++j) {
      CHECK(se_for(fit2, d2, v, j) ==
            Catch::Approx(std::fabs(a) * se_for(base, d, v, j)).epsilon(1e-9));
    }
  }
}

TEST_CASE("scaling the response by two is bit-exact") {
  const Dataset d = testsup::random_dataset(99, 25);
  std::vector<double> y2(static_cast<std::size_t>(d.n()));
  for (std::int64_t i = 0; i < d.n(); ++i) y2[static_cast<std::size_t>(i)] = 2.0 * d.y(i);
  const Dataset d2(std::vector<double>(d.design()), std::move(y2), d.k());
  const LsFit a = fit_ols(d);
  const LsFit b = fit_ols(d2);
  CHECK(b.beta[0] == 2.0 * a.beta[0]);
  CHECK(b.beta[1] == 2.0 * a.beta[1]);
}

TEST_CASE("HC1 is the definitional rescaling of HC0") {
  const Dataset d = testsup::random_dataset(123, 17);
  const LsFit fit = fit_ols(d);
  const double ratio = std::sqrt(static_cast<double>(d.n()) /
                                 static_cast<double>(d.n() - d.k()));
  for (std::int64_t j = 0; j < d.k(); ++j) {
    CHECK(se_for(fit, d, SeVariant::kHc1, j) ==
          Catch::Approx(ratio * se_for(fit, d, SeVariant::kHc0, j)).epsilon(1e-12));
  }
}

TEST_CASE("intercept-only design has flat leverage 1/n") {
  const Dataset d = Dataset::from_covariates({}, {1.0, 2.0, 3.0, 4.0});
  const LsFit fit = fit_ols(d);
  for (double h : fit.leverages) CHECK(h == Catch::Approx(0.25).epsilon(1e-13));
  CHECK(fit.beta[0] == Catch::Approx(2.5).epsilon(1e-13));
}

TEST_CASE("leverage-one point makes HC2..HC5 throw") {
  // x = (0,0,0,5): the isolated point carries leverage exactly 1.
  const Dataset d = Dataset::from_covariates({{0.0, 0.0, 0.0, 5.0}}, {1.0, 2.0, 3.0, 9.0});
  const LsFit fit = fit_ols(d);
  CHECK(fit.leverages[3] == Catch::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(se_for(fit, d, SeVariant::kHc2, 1), LeverageOne);
  CHECK_THROWS_AS(se_for(fit, d, SeVariant::kHc3, 1), LeverageOne);
  CHECK_THROWS_AS(se_for(fit, d, SeVariant::kHc4, 1), LeverageOne);
  CHECK_THROWS_AS(se_for(fit, d, SeVariant::kHc5, 1), LeverageOne);
  CHECK_NOTHROW(se_for(fit, d, SeVariant::kHc0, 1));
  CHECK_NOTHROW(se_for(fit, d, SeVariant::kHc1, 1));
  CHECK_NOTHROW(se_for(fit, d, SeVariant::kClassical, 1));
}

TEST_CASE("collinear design raises SingularDesign") {
  const Dataset d = Dataset::from_covariates({{3.0, 3.0, 3.0, 3.0}}, {1.0, 2.0, 3.0, 4.0});
  CHECK_THROWS_AS(fit_ols(d), SingularDesign);
}

TEST_CASE("too few rows raises InvalidDataset") {
  const Dataset d = Dataset::from_covariates({{1.0, 2.0}}, {1.0, 2.0});
  CHECK_THROWS_AS(fit_ols(d), InvalidDataset);
}

TEST_CASE("dataset structural validation") {
  CHECK_THROWS_AS(Dataset({2.0, 1.0}, {1.0}, 2), InvalidDataset);  // bad intercept
  CHECK_THROWS_AS(Dataset({1.0, NAN}, {1.0}, 2), InvalidDataset);
  CHECK_THROWS_AS(Dataset({1.0, 2.0}, {1.0, 2.0}, 2), InvalidDataset);  // y mismatch
}
