#pragma once

#include <vector>

#include "tcgen/rng.hpp"

namespace tcgen::ar1 {

/// Stationary Gaussian AR(1) parameters.
struct Ar1Params {
  double phi = 0.0;     // |phi| < 1
  double sigma2 = 0.0;  // innovation variance
};

/// Exact stationary Gaussian log-likelihood of independent segments, with
/// the innovation variance profiled out.
double profile_loglik(const std::vector<std::vector<double>>& segments, double phi,
                      double* sigma2_out = nullptr);

/// Exact MLE over independent event segments: golden-section search on phi
/// in (-0.999, 0.999) with sigma^2 profiled in closed form.
Ar1Params fit_ar1(const std::vector<std::vector<double>>& segments);

/// Draws a stationary AR(1) path of length n.
std::vector<double> simulate_ar1(const Ar1Params& p, int n, Rng& rng);

/// Arithmetic mean of per-series MLE autoregressive coefficients, clamped
/// to (-0.999, 0.999). Each series is a list of independent segments.
double pool_ar_coefficient(const std::vector<std::vector<std::vector<double>>>& series_set);

}  // namespace tcgen::ar1
