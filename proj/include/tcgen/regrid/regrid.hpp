#pragma once

#include <vector>

#include "tcgen/core/types.hpp"

namespace tcgen::regrid {

/// Local ordinary-kriging settings for the Euclidean -> polar resampling.
///
/// Kriging runs in a 2-D chart (x, y) = (r/100 * cos(theta), r/100 * sin(theta)),
/// i.e. the radius axis rescaled from [0, 1000] km to [0, 10].
struct KrigeConfig {
  double range_scaled = 2.0;   // exponential covariance range in chart units
  double nugget_rel = 1e-6;    // nugget as a fraction of the field variance
  int n_neighbors = 16;

  void validate() const;
};

/// Kriges one native-grid field to the regular storm-centered polar grid.
///
/// Each polar node is predicted from its n_neighbors nearest source cells
/// (chart distance), exponential covariance exp(-d/range) plus nugget.
core::PolarField euclid_to_polar(const double* field, const core::GridSpec& grid,
                                 core::LonLat center, const KrigeConfig& cfg,
                                 const core::PolarGridSpec& polar = {},
                                 int threads = 1);

/// Bilinear interpolation on the polar grid with theta wraparound.
/// Queries beyond r_max_km return 0 (outside model support); radii inside
/// support but outside the cell-center range clamp to the nearest ring.
double bilinear_polar_eval(const core::PolarField& pf, double r_km, double theta);

/// Evaluates a polar-grid surface on the native grid via to_storm_polar
/// followed by bilinear_polar_eval. Cells beyond r_max_km get 0.
std::vector<double> polar_to_euclid(const core::PolarField& pf, core::LonLat center,
                                    const core::GridSpec& grid);

}  // namespace tcgen::regrid
