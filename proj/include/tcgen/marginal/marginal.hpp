#pragma once

#include <span>
#include <vector>

#include "tcgen/core/types.hpp"

namespace tcgen::marginal {

struct GammaParams {
  double shape = 0.0;
  double rate = 0.0;
};

/// Gamma MLE on positive values via Newton iteration on the shape equation
/// log(shape) - digamma(shape) = log(mean) - mean(log); rate = shape/mean.
GammaParams fit_gamma(std::span<const double> positives);

double gamma_cdf(const GammaParams& g, double x);
double gamma_quantile(const GammaParams& g, double p);

/// Empirical CDF of positive values with mid-rank ties and an (n+1)
/// denominator, so the evaluator stays in the open interval (0, 1).
class Ecdf {
 public:
  /// Builds from a pool of values; non-positive entries are dropped.
  static Ecdf from_positives(std::span<const double> values);

  /// Rank-based probability with linear interpolation between order
  /// statistics, clamped to the extreme sample probabilities.
  double operator()(double x) const;

  std::size_t sample_size() const { return n_; }

 private:
  std::vector<double> values_;  // sorted distinct positives
  std::vector<double> probs_;   // mid-rank probability at each distinct value
  std::size_t n_ = 0;
};

/// Eq.-style anamorphosis: out = G^{-1}(F(y)) on positives, exact 0 where
/// y <= 0. Applied pointwise.
std::vector<double> anamorphose(std::span<const double> y, const Ecdf& F,
                                const GammaParams& G);

struct TaperConfig {
  double alpha = 4.0;
  double beta = 8.0;
};

/// Radially symmetric cos^2 taper: 1 inside alpha*rmax, ramp to 0 at
/// beta*rmax. One weight per native grid cell.
std::vector<double> taper_weights(const core::GridSpec& grid, core::LonLat center,
                                  double rmax_km, const TaperConfig& cfg = {});

/// Scalar taper weight at great-circle radius r_km.
double taper_weight(double r_km, double rmax_km, const TaperConfig& cfg = {});

}  // namespace tcgen::marginal
