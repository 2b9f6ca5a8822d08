#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "tcgen/core/types.hpp"
#include "tcgen/eof/eof.hpp"
#include "tcgen/rng.hpp"

namespace tcgen::circular {

/// Per-band harmonic regression coefficients for one hour.
struct HarmonicFit {
  double d0 = 0.0;
  std::vector<double> d1;  // cosine coefficients, m = 1..M
  std::vector<double> d2;  // sine coefficients, m = 1..M
};

/// Harmonic coefficients for every hour and radial band.
/// Storage: d0 is n_r x T column-per-hour; d1/d2 are per harmonic m.
struct HarmonicCoeffs {
  int M = 0;
  int n_r = 0;
  int T = 0;
  Eigen::MatrixXd d0;               // n_r x T
  std::vector<Eigen::MatrixXd> d1;  // M matrices, each n_r x T
  std::vector<Eigen::MatrixXd> d2;  // M matrices, each n_r x T
};

/// Empirical second-moment model of the harmonic coefficient vectors plus
/// the pooled temporal AR coefficient.
struct ResidualModel {
  int M = 0;
  int n_r = 0;
  Eigen::MatrixXd cov0;               // n_r x n_r
  std::vector<Eigen::MatrixXd> cov1;  // per harmonic
  std::vector<Eigen::MatrixXd> cov2;
  double phi_bar = 0.0;
  double jitter_used = 0.0;
};

/// Y minus the trend reconstruction sum_l mu_hat_l(t) phi_l, hour by hour.
/// mu_hat is L x T row-major.
std::vector<core::PolarField> residual_fields(const std::vector<core::PolarField>& y,
                                              const eof::EofBasis& basis,
                                              const std::vector<double>& mu_hat);

/// Least-squares fit of band values on {1, cos(m theta), sin(m theta)}.
/// On the uniform theta grid this equals the discrete Fourier projection.
HarmonicFit fit_harmonics(std::span<const double> band, const std::vector<double>& thetas,
                          int M);

/// Fits harmonic coefficients for every hour and band of a residual stack.
HarmonicCoeffs fit_all_harmonics(const std::vector<core::PolarField>& residuals, int M,
                                 int threads = 1);

/// Uncentered empirical second-moment matrices per harmonic component with
/// jitter until Cholesky succeeds; phi_bar pooled over all (component, band)
/// series segmented by event. Zero-variance series are skipped in pooling.
ResidualModel estimate_residual_model(const HarmonicCoeffs& coeffs,
                                      const std::vector<int>& event_lengths);

/// Simulates the residual polar process over T_sim hours: each harmonic
/// coefficient vector follows a stationary vector AR(1)
/// x_t = phi_bar x_{t-1} + sqrt(1 - phi_bar^2) L z_t with L L^T = cov.
/// Continuous evaluation is bilinear interpolation of the returned grids.
std::vector<core::PolarField> simulate_residual(const ResidualModel& model, int T_sim,
                                                Rng& rng,
                                                const core::PolarGridSpec& spec = {});

}  // namespace tcgen::circular
