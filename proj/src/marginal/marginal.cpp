#include "tcgen/marginal/marginal.hpp"

#include <algorithm>
#include <cmath>

#include "tcgen/common.hpp"
#include "tcgen/core/geodesy.hpp"
#include "tcgen/mathfn.hpp"

namespace tcgen::marginal {

GammaParams fit_gamma(std::span<const double> positives) {
  if (positives.size() < 2) throw InputError("fit_gamma: need at least 2 positive values");
  double sum = 0.0, sum_log = 0.0;
  double first = positives[0];
  bool distinct = false;
  for (double v : positives) {
    if (!(v > 0.0)) throw InputError("fit_gamma: non-positive value");
    sum += v;
    sum_log += std::log(v);
    if (v != first) distinct = true;
  }
  if (!distinct) throw InputError("fit_gamma: all values identical, MLE degenerate");
  const double n = static_cast<double>(positives.size());
  const double mean = sum / n;
  const double s = std::log(mean) - sum_log / n;  // > 0 by Jensen

  // Standard closed-form starting value, then Newton on
  // f(k) = log k - digamma(k) - s.
  double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  for (int it = 0; it < 100; ++it) {
    const double f = std::log(k) - mathfn::digamma(k) - s;
    if (std::abs(f) < 1e-12) break;
    const double fp = 1.0 / k - mathfn::trigamma(k);
    double next = k - f / fp;
    if (!(next > 0.0)) next = 0.5 * k;
    k = next;
  }
  const double grad = std::log(k) - mathfn::digamma(k) - s;
  if (std::abs(grad) > 1e-10) {
    throw NumericalError("fit_gamma: Newton iteration did not converge");
  }
  return {k, k / mean};
}

double gamma_cdf(const GammaParams& g, double x) {
  if (x <= 0.0) return 0.0;
  return mathfn::reg_inc_gamma_p(g.shape, g.rate * x);
}

double gamma_quantile(const GammaParams& g, double p) {
  return mathfn::inv_reg_inc_gamma_p(g.shape, p) / g.rate;
}

Ecdf Ecdf::from_positives(std::span<const double> values) {
  std::vector<double> pos;
  pos.reserve(values.size());
  for (double v : values) {
    if (v > 0.0) pos.push_back(v);
  }
  if (pos.empty()) throw InputError("Ecdf: no positive values (degenerate storm)");
  std::sort(pos.begin(), pos.end());

  Ecdf e;
  e.n_ = pos.size();
  const double denom = static_cast<double>(pos.size()) + 1.0;
  std::size_t i = 0;
  while (i < pos.size()) {
    std::size_t j = i;
    while (j < pos.size() && pos[j] == pos[i]) ++j;
    // mid-rank of the tie group, 1-based
    const double mid_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    e.values_.push_back(pos[i]);
    e.probs_.push_back(mid_rank / denom);
    i = j;
  }
  return e;
}

double Ecdf::operator()(double x) const {
  if (x <= values_.front()) return probs_.front();
  if (x >= values_.back()) return probs_.back();
  const auto it = std::upper_bound(values_.begin(), values_.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - values_.begin());
  const std::size_t lo = hi - 1;
  const double w = (x - values_[lo]) / (values_[hi] - values_[lo]);
  return probs_[lo] + w * (probs_[hi] - probs_[lo]);
}

std::vector<double> anamorphose(std::span<const double> y, const Ecdf& F,
                                const GammaParams& G) {
  std::vector<double> out(y.size(), 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > 0.0) out[i] = gamma_quantile(G, F(y[i]));
  }
  return out;
}

double taper_weight(double r_km, double rmax_km, const TaperConfig& cfg) {
  if (!(rmax_km > 0.0)) throw InputError("taper_weight: rmax_km must be > 0");
  if (!(cfg.beta > cfg.alpha && cfg.alpha > 0.0)) {
    throw InputError("taper_weight: need beta > alpha > 0");
  }
  const double inner = cfg.alpha * rmax_km;
  const double outer = cfg.beta * rmax_km;
  if (r_km <= inner) return 1.0;
  if (r_km >= outer) return 0.0;
  const double c = std::cos(0.5 * core::kPi * (r_km - inner) / (outer - inner));
  return c * c;
}

std::vector<double> taper_weights(const core::GridSpec& grid, core::LonLat center,
                                  double rmax_km, const TaperConfig& cfg) {
  grid.validate();
  std::vector<double> w(static_cast<std::size_t>(grid.n_cells()));
  for (int j = 0; j < grid.n_lat; ++j) {
    for (int i = 0; i < grid.n_lon; ++i) {
      const double r = core::gc_distance({grid.lon(i), grid.lat(j)}, center);
      w[static_cast<std::size_t>(j) * grid.n_lon + i] = taper_weight(r, rmax_km, cfg);
    }
  }
  return w;
}

}  // namespace tcgen::marginal
