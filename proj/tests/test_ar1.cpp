#include <doctest.h>

#include <cmath>
#include <vector>

#include "tcgen/ar1/ar1.hpp"
#include "tcgen/common.hpp"
#include "tcgen/rng.hpp"

using namespace tcgen;

namespace {

std::vector<double> make_series(double phi, double sigma2, int n, std::uint64_t seed) {
  Rng rng(seed);
  return ar1::simulate_ar1({phi, sigma2}, n, rng);
}

}  // namespace

TEST_CASE("maximum likelihood recovers the autoregressive coefficient") {
  for (double phi : {0.0, 0.5, 0.8}) {
    const auto x = make_series(phi, 1.0, 2000, 18);
    const auto fit = ar1::fit_ar1({x});
    CHECK(std::abs(fit.phi - phi) < 0.05);
    if (phi == 0.0) CHECK(std::abs(fit.sigma2 - 1.0) < 0.1);
  }
}

TEST_CASE("optimizer matches a 2001-point likelihood grid search") {
  const auto x = make_series(0.6, 2.0, 500, 19);
  const std::vector<std::vector<double>> segs{x};
  const auto fit = ar1::fit_ar1(segs);

  double best_phi = 0.0, best_ll = -1e300;
  const int n_grid = 2001;
  for (int i = 0; i < n_grid; ++i) {
    const double phi = -0.999 + 2.0 * 0.999 * i / (n_grid - 1);
    const double ll = ar1::profile_loglik(segs, phi);
    if (ll > best_ll) { best_ll = ll; best_phi = phi; }
  }
  const double grid_step = 2.0 * 0.999 / (n_grid - 1);
  CHECK(std::abs(fit.phi - best_phi) <= grid_step);
  // The refined optimum is at least as good as every grid point.
  double sigma2;
  CHECK(ar1::profile_loglik(segs, fit.phi, &sigma2) >= best_ll - 1e-9);
}

TEST_CASE("likelihood pools independent event segments") {
  const auto a = make_series(0.7, 1.0, 400, 23);
  const auto b = make_series(0.7, 1.0, 400, 29);
  const auto fit = ar1::fit_ar1({a, b});
  CHECK(std::abs(fit.phi - 0.7) < 0.07);
}

TEST_CASE("simulation with zero innovation variance is identically zero") {
  Rng rng(31);
  const auto x = ar1::simulate_ar1({0.5, 0.0}, 100, rng);
  for (double v : x) CHECK(v == 0.0);
}

TEST_CASE("simulated series match stationary moments") {
  const double phi = 0.6, sigma2 = 1.5;
  const auto x = make_series(phi, sigma2, 100000, 37);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= x.size();
  double var = 0.0, lag1 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) var += (x[i] - mean) * (x[i] - mean);
  var /= x.size();
  for (std::size_t i = 1; i < x.size(); ++i) lag1 += (x[i] - mean) * (x[i - 1] - mean);
  lag1 /= (x.size() - 1) * var;
  CHECK(std::abs(var - sigma2 / (1.0 - phi * phi)) / (sigma2 / (1.0 - phi * phi)) < 0.05);
  CHECK(std::abs(lag1 - phi) < 0.02);
}

TEST_CASE("simulation is reproducible per seed") {
  Rng r1(55), r2(55);
  const auto a = ar1::simulate_ar1({0.4, 1.0}, 64, r1);
  const auto b = ar1::simulate_ar1({0.4, 1.0}, 64, r2);
  CHECK(a == b);
}

TEST_CASE("pooled coefficient is the mean of per-series estimates") {
  const auto a = make_series(0.2, 1.0, 800, 41);
  const auto b = make_series(0.8, 1.0, 800, 43);
  const double phi_a = ar1::fit_ar1({a}).phi;
  const double phi_b = ar1::fit_ar1({b}).phi;
  const double pooled = ar1::pool_ar_coefficient({{a}, {b}});
  CHECK(pooled == doctest::Approx(0.5 * (phi_a + phi_b)).epsilon(1e-12));
  CHECK(pooled >= std::min(phi_a, phi_b));
  CHECK(pooled <= std::max(phi_a, phi_b));

  // Identical series set: pooled equals the individual estimate.
  CHECK(ar1::pool_ar_coefficient({{a}, {a}}) == doctest::Approx(phi_a).epsilon(1e-12));
}

TEST_CASE("degenerate input is rejected") {
  const std::vector<std::vector<double>> too_short{{0.0, 0.0}};
  const std::vector<std::vector<double>> zero_var{{0.0, 0.0, 0.0, 0.0}};
  CHECK_THROWS_AS(ar1::fit_ar1(too_short), InputError);
  CHECK_THROWS_AS(ar1::fit_ar1(zero_var), InputError);
}
