#pragma once

#include <utility>
#include <vector>

#include "tcgen/core/types.hpp"

namespace tcgen::core {

/// Great-circle (haversine) distance in km on the reference sphere.
double gc_distance(LonLat a, LonLat b);

struct PolarCoord {
  double r_km = 0.0;
  double theta = 0.0;  // [-pi, pi), 0 due east, pi/2 due north
};

/// Storm-centered polar coordinates of s.
///
/// Radius is the great-circle distance; the angle comes from a local
/// equirectangular chart scaled by cos(center latitude).
PolarCoord to_storm_polar(LonLat s, LonLat center);

/// Inverse of to_storm_polar along the chart ray: the returned point has
/// gc_distance == r_km and chart angle theta.
LonLat polar_to_lonlat(LonLat center, double r_km, double theta);

/// Minimum great-circle distance from center to a land/sea boundary cell.
///
/// A boundary cell has at least one 4-neighbor with the opposite mask value,
/// so the result is invariant to swapping land and sea labels.
double dist_to_coast(LonLat center, const std::vector<std::uint8_t>& mask,
                     const GridSpec& grid);

}  // namespace tcgen::core
