#pragma once

#include <optional>
#include <vector>

#include "tcgen/core/types.hpp"

namespace tcgen::trackextract {

/// Normalized convolution with a separable double-exponential (Laplace)
/// kernel in grid-index space, truncated at 4 bandwidths. Edge cells
/// renormalize over the available support.
std::vector<double> smooth_field(const double* field, const core::GridSpec& grid,
                                 double bandwidth_cells);

/// Vertical vorticity dv/dx - du/dy with second-order finite differences
/// (central in the interior, one-sided at edges). Metric terms use the
/// local latitude for the zonal spacing.
std::vector<double> curl(const double* u, const double* v, const core::GridSpec& grid);

/// Cell-center coordinates of the curl argmax within an L-infinity window
/// around the reference center. Ties break to the smallest lat index, then
/// the smallest lon index.
core::LonLat detect_center(const double* curl_field, const core::GridSpec& grid,
                           core::LonLat reference_center, double window_deg = 2.0);

/// Natural cubic smoothing spline fit.
struct SplineFit {
  std::vector<double> knots;    // the input time points
  std::vector<double> fitted;   // spline values at the knots
  std::vector<double> second_deriv;  // natural spline second derivatives
  double lambda = 0.0;          // penalty actually used

  /// Piecewise-cubic evaluation (linear extrapolation beyond the knots).
  double operator()(double t) const;
};

/// Minimizes sum (y_i - f(t_i))^2 + lambda * integral f''^2 over natural
/// cubic splines. With no lambda given, lambda is chosen by generalized
/// cross-validation; lambda = 0 interpolates.
SplineFit smoothing_spline(const std::vector<double>& t, const std::vector<double>& y,
                           std::optional<double> lambda = std::nullopt);

/// Great-circle distance from center to the wind-speed argmax within
/// search_km. Ties break toward the smaller distance.
double radius_max_wind(const double* speed, const core::GridSpec& grid,
                       core::LonLat center, double search_km = 400.0);

struct ExtractConfig {
  double smooth_bandwidth_cells = 1.5;
  double center_window_deg = 2.0;
  double rmax_search_km = 400.0;
};

/// Full predictor-extraction pipeline from gridded wind/pressure stacks and
/// per-hour reference centers. An empty land mask means no coastline on the
/// grid; dist_coast_km is then 0.
core::StormTrack extract_track(const core::FieldStack& u_stack,
                               const core::FieldStack& v_stack,
                               const core::FieldStack& p_stack,
                               const std::vector<core::LonLat>& reference_centers,
                               const std::vector<std::uint8_t>& land_mask,
                               const ExtractConfig& cfg = {});

}  // namespace tcgen::trackextract
