#include "tcgen/circular/circular.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "tcgen/ar1/ar1.hpp"
#include "tcgen/common.hpp"
#include "tcgen/parallel.hpp"

namespace tcgen::circular {

using core::PolarField;
using core::PolarGridSpec;

std::vector<PolarField> residual_fields(const std::vector<PolarField>& y,
                                        const eof::EofBasis& basis,
                                        const std::vector<double>& mu_hat) {
  const int T = static_cast<int>(y.size());
  if (mu_hat.size() != static_cast<std::size_t>(basis.L) * T) {
    throw InputError("residual_fields: mu_hat shape mismatch");
  }
  std::vector<PolarField> out;
  out.reserve(y.size());
  for (int t = 0; t < T; ++t) {
    if (!(y[t].spec == basis.spec)) throw InputError("residual_fields: spec mismatch");
    std::vector<double> c(basis.L);
    for (int l = 0; l < basis.L; ++l) c[l] = mu_hat[static_cast<std::size_t>(l) * T + t];
    PolarField trend = eof::reconstruct(basis, c);
    PolarField r = y[t];
    for (std::size_t k = 0; k < r.values.size(); ++k) r.values[k] -= trend.values[k];
    out.push_back(std::move(r));
  }
  return out;
}

HarmonicFit fit_harmonics(std::span<const double> band, const std::vector<double>& thetas,
                          int M) {
  const int n = static_cast<int>(band.size());
  if (static_cast<int>(thetas.size()) != n) throw InputError("fit_harmonics: theta grid mismatch");
  if (2 * M + 1 > n) throw InputError("fit_harmonics: need 2M + 1 <= band length");

  // Uniform full-circle grid: the OLS normal equations are diagonal, so the
  // fit reduces to discrete Fourier sums.
  HarmonicFit fit;
  fit.d1.assign(M, 0.0);
  fit.d2.assign(M, 0.0);
  double mean = 0.0;
  for (double v : band) mean += v;
  fit.d0 = mean / n;
  for (int m = 1; m <= M; ++m) {
    double c = 0.0, s = 0.0;
    for (int j = 0; j < n; ++j) {
      c += band[j] * std::cos(m * thetas[j]);
      s += band[j] * std::sin(m * thetas[j]);
    }
    fit.d1[m - 1] = 2.0 * c / n;
    fit.d2[m - 1] = 2.0 * s / n;
  }
  return fit;
}

HarmonicCoeffs fit_all_harmonics(const std::vector<PolarField>& residuals, int M,
                                 int threads) {
  if (residuals.empty()) throw InputError("fit_all_harmonics: no residual fields");
  const PolarGridSpec spec = residuals.front().spec;
  const int T = static_cast<int>(residuals.size());
  std::vector<double> thetas(spec.n_theta);
  for (int j = 0; j < spec.n_theta; ++j) thetas[j] = spec.theta(j);

  HarmonicCoeffs co;
  co.M = M;
  co.n_r = spec.n_r;
  co.T = T;
  co.d0.resize(spec.n_r, T);
  co.d1.assign(M, Eigen::MatrixXd(spec.n_r, T));
  co.d2.assign(M, Eigen::MatrixXd(spec.n_r, T));

  parallel_for(static_cast<std::size_t>(T), threads, [&](std::size_t t) {
    if (!(residuals[t].spec == spec)) throw InputError("fit_all_harmonics: spec mismatch");
    for (int k = 0; k < spec.n_r; ++k) {
      const double* band = residuals[t].values.data() +
                           static_cast<std::size_t>(k) * spec.n_theta;
      const HarmonicFit f = fit_harmonics({band, static_cast<std::size_t>(spec.n_theta)},
                                          thetas, M);
      co.d0(k, t) = f.d0;
      for (int m = 0; m < M; ++m) {
        co.d1[m](k, t) = f.d1[m];
        co.d2[m](k, t) = f.d2[m];
      }
    }
  });
  return co;
}

namespace {

// Uncentered second-moment matrix T^{-1} sum_t d(t) d(t)^T.
Eigen::MatrixXd second_moment(const Eigen::MatrixXd& d) {
  return (d * d.transpose()) / static_cast<double>(d.cols());
}

// Adds jitter to the diagonal until LLT succeeds; returns the jitter used.
double make_pd(Eigen::MatrixXd& m) {
  const double scale = std::max(m.trace() / m.rows(), 1e-300);
  double jitter = 1e-10 * scale;
  const double max_jitter = 1e-4 * scale;
  for (;;) {
    Eigen::MatrixXd try_m = m + jitter * Eigen::MatrixXd::Identity(m.rows(), m.cols());
    Eigen::LLT<Eigen::MatrixXd> llt(try_m);
    if (llt.info() == Eigen::Success) {
      m = try_m;
      return jitter;
    }
    if (jitter >= max_jitter) {
      throw NumericalError("estimate_residual_model: covariance not positive definite "
                           "after maximum jitter");
    }
    jitter *= 10.0;
  }
}

// Per-band AR coefficient series, segmented by event; zero-variance series
// are skipped (bands with no residual signal).
void pool_band_series(const Eigen::MatrixXd& d, const std::vector<int>& event_lengths,
                      std::vector<std::vector<std::vector<double>>>& out) {
  for (int k = 0; k < d.rows(); ++k) {
    std::vector<std::vector<double>> segments;
    int offset = 0;
    double var = 0.0, mean = 0.0;
    for (int t = 0; t < d.cols(); ++t) mean += d(k, t);
    mean /= static_cast<double>(d.cols());
    for (int t = 0; t < d.cols(); ++t) var += (d(k, t) - mean) * (d(k, t) - mean);
    for (int len : event_lengths) {
      std::vector<double> seg(len);
      for (int t = 0; t < len; ++t) seg[t] = d(k, offset + t);
      segments.push_back(std::move(seg));
      offset += len;
    }
    if (var > 1e-30) out.push_back(std::move(segments));
  }
}

}  // namespace

ResidualModel estimate_residual_model(const HarmonicCoeffs& coeffs,
                                      const std::vector<int>& event_lengths) {
  if (coeffs.T < 1) throw InputError("estimate_residual_model: no data");
  int total = 0;
  for (int len : event_lengths) total += len;
  if (total != coeffs.T) {
    throw InputError("estimate_residual_model: event lengths do not sum to T");
  }

  ResidualModel model;
  model.M = coeffs.M;
  model.n_r = coeffs.n_r;
  model.cov0 = second_moment(coeffs.d0);
  model.jitter_used = make_pd(model.cov0);
  for (int m = 0; m < coeffs.M; ++m) {
    model.cov1.push_back(second_moment(coeffs.d1[m]));
    model.jitter_used = std::max(model.jitter_used, make_pd(model.cov1.back()));
    model.cov2.push_back(second_moment(coeffs.d2[m]));
    model.jitter_used = std::max(model.jitter_used, make_pd(model.cov2.back()));
  }

  std::vector<std::vector<std::vector<double>>> series_set;
  pool_band_series(coeffs.d0, event_lengths, series_set);
  for (int m = 0; m < coeffs.M; ++m) {
    pool_band_series(coeffs.d1[m], event_lengths, series_set);
    pool_band_series(coeffs.d2[m], event_lengths, series_set);
  }
  model.phi_bar = series_set.empty() ? 0.0 : ar1::pool_ar_coefficient(series_set);
  return model;
}

std::vector<PolarField> simulate_residual(const ResidualModel& model, int T_sim,
                                          Rng& rng, const PolarGridSpec& spec) {
  if (T_sim < 1) throw InputError("simulate_residual: T_sim must be >= 1");
  if (model.n_r != spec.n_r) throw InputError("simulate_residual: spec mismatch");

  const int n_components = 1 + 2 * model.M;
  const double phi = model.phi_bar;
  const double innov_scale = std::sqrt(std::max(0.0, 1.0 - phi * phi));

  // Cholesky factors (zero matrix allowed: factor is zero, process is zero).
  auto factor = [](const Eigen::MatrixXd& cov) {
    if (cov.isZero(0.0)) return Eigen::MatrixXd(Eigen::MatrixXd::Zero(cov.rows(), cov.cols()));
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("simulate_residual: covariance Cholesky failed");
    }
    return Eigen::MatrixXd(llt.matrixL());
  };
  std::vector<Eigen::MatrixXd> L(n_components);
  L[0] = factor(model.cov0);
  for (int m = 0; m < model.M; ++m) {
    L[1 + 2 * m] = factor(model.cov1[m]);
    L[2 + 2 * m] = factor(model.cov2[m]);
  }

  // Coefficient paths: components are mutually independent.
  std::vector<Eigen::MatrixXd> paths(n_components);
  Eigen::VectorXd z(model.n_r);
  for (int c = 0; c < n_components; ++c) {
    paths[c].resize(model.n_r, T_sim);
    for (int t = 0; t < T_sim; ++t) {
      for (int k = 0; k < model.n_r; ++k) z(k) = rng.normal();
      if (t == 0) {
        paths[c].col(0) = L[c] * z;  // stationary start
      } else {
        paths[c].col(t) = phi * paths[c].col(t - 1) + innov_scale * (L[c] * z);
      }
    }
  }

  // Assemble U on the polar grid.
  std::vector<PolarField> out;
  out.reserve(T_sim);
  std::vector<double> cos_mt(static_cast<std::size_t>(model.M) * spec.n_theta);
  std::vector<double> sin_mt(cos_mt.size());
  for (int m = 0; m < model.M; ++m) {
    for (int j = 0; j < spec.n_theta; ++j) {
      cos_mt[static_cast<std::size_t>(m) * spec.n_theta + j] = std::cos((m + 1) * spec.theta(j));
      sin_mt[static_cast<std::size_t>(m) * spec.n_theta + j] = std::sin((m + 1) * spec.theta(j));
    }
  }
  for (int t = 0; t < T_sim; ++t) {
    PolarField pf(spec);
    for (int k = 0; k < spec.n_r; ++k) {
      const double d0 = paths[0](k, t);
      for (int j = 0; j < spec.n_theta; ++j) {
        double v = d0;
        for (int m = 0; m < model.M; ++m) {
          v += paths[1 + 2 * m](k, t) * cos_mt[static_cast<std::size_t>(m) * spec.n_theta + j] +
               paths[2 + 2 * m](k, t) * sin_mt[static_cast<std::size_t>(m) * spec.n_theta + j];
        }
        pf.at(k, j) = v;
      }
    }
    out.push_back(std::move(pf));
  }
  return out;
}

}  // namespace tcgen::circular
