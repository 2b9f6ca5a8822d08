#include "tcgen/ar1/ar1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tcgen/common.hpp"

namespace tcgen::ar1 {

namespace {
constexpr double kPhiBound = 0.999;
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Sum of squares S(phi) = sum_seg [(1-phi^2) x0^2 + sum_t (x_t - phi x_{t-1})^2]
// and the total observation count.
double s_of_phi(const std::vector<std::vector<double>>& segments, double phi,
                std::size_t* n_out) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& seg : segments) {
    if (seg.empty()) continue;
    s += (1.0 - phi * phi) * seg[0] * seg[0];
    for (std::size_t t = 1; t < seg.size(); ++t) {
      const double e = seg[t] - phi * seg[t - 1];
      s += e * e;
    }
    n += seg.size();
  }
  if (n_out) *n_out = n;
  return s;
}
}  // namespace

double profile_loglik(const std::vector<std::vector<double>>& segments, double phi,
                      double* sigma2_out) {
  std::size_t n = 0;
  const double s = s_of_phi(segments, phi, &n);
  if (n < 3) throw InputError("fit_ar1: need at least 3 observations in total");
  if (s <= 0.0) throw InputError("fit_ar1: degenerate (zero-variance) series");
  const double sigma2 = s / static_cast<double>(n);
  if (sigma2_out) *sigma2_out = sigma2;
  double n_segments_log = 0.0;
  for (const auto& seg : segments) {
    if (!seg.empty()) n_segments_log += std::log(1.0 - phi * phi);
  }
  // -n/2 log(2 pi sigma2) + (1/2) sum_seg log(1-phi^2) - S/(2 sigma2)
  return -0.5 * static_cast<double>(n) * std::log(kTwoPi * sigma2) +
         0.5 * n_segments_log - 0.5 * s / sigma2;
}

Ar1Params fit_ar1(const std::vector<std::vector<double>>& segments) {
  // Coarse bracket, then golden-section refinement; the concentrated
  // likelihood is smooth and effectively unimodal on the stationary region.
  double best_phi = 0.0;
  double best_ll = -std::numeric_limits<double>::infinity();
  const int coarse = 101;
  for (int i = 0; i < coarse; ++i) {
    const double phi = -kPhiBound + 2.0 * kPhiBound * i / (coarse - 1);
    const double ll = profile_loglik(segments, phi);
    if (ll > best_ll) {
      best_ll = ll;
      best_phi = phi;
    }
  }
  const double step = 2.0 * kPhiBound / (coarse - 1);
  double lo = std::max(-kPhiBound, best_phi - step);
  double hi = std::min(kPhiBound, best_phi + step);
  const double gr = 0.6180339887498949;
  double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
  double fa = profile_loglik(segments, a), fb = profile_loglik(segments, b);
  for (int it = 0; it < 80; ++it) {
    if (fa > fb) {
      hi = b; b = a; fb = fa;
      a = hi - gr * (hi - lo);
      fa = profile_loglik(segments, a);
    } else {
      lo = a; a = b; fa = fb;
      b = lo + gr * (hi - lo);
      fb = profile_loglik(segments, b);
    }
  }
  Ar1Params p;
  p.phi = 0.5 * (lo + hi);
  profile_loglik(segments, p.phi, &p.sigma2);
  return p;
}

std::vector<double> simulate_ar1(const Ar1Params& p, int n, Rng& rng) {
  if (n < 1) throw InputError("simulate_ar1: n must be >= 1");
  std::vector<double> x(n);
  const double sd = std::sqrt(std::max(0.0, p.sigma2));
  x[0] = sd / std::sqrt(1.0 - p.phi * p.phi) * rng.normal();
  for (int t = 1; t < n; ++t) {
    x[t] = p.phi * x[t - 1] + sd * rng.normal();
  }
  return x;
}

double pool_ar_coefficient(
    const std::vector<std::vector<std::vector<double>>>& series_set) {
  if (series_set.empty()) throw InputError("pool_ar_coefficient: empty series set");
  double acc = 0.0;
  for (const auto& series : series_set) {
    acc += fit_ar1(series).phi;
  }
  return std::clamp(acc / static_cast<double>(series_set.size()), -kPhiBound, kPhiBound);
}

}  // namespace tcgen::ar1
