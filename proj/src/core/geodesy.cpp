#include "tcgen/core/geodesy.hpp"

#include <cmath>
#include <limits>

#include "tcgen/common.hpp"

namespace tcgen::core {

namespace {
constexpr double kDegToRad = kPi / 180.0;

void check_lat(LonLat p, const char* name) {
  if (!(p.lat >= -90.0 && p.lat <= 90.0)) {
    throw InputError(std::string(name) + ": latitude out of [-90, 90]: " +
                     std::to_string(p.lat));
  }
}
}  // namespace

double gc_distance(LonLat a, LonLat b) {
  check_lat(a, "gc_distance a");
  check_lat(b, "gc_distance b");
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlam = (b.lon - a.lon) * kDegToRad;
  const double sp = std::sin(0.5 * dphi);
  const double sl = std::sin(0.5 * dlam);
  const double h = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

PolarCoord to_storm_polar(LonLat s, LonLat center) {
  check_lat(s, "to_storm_polar s");
  check_lat(center, "to_storm_polar center");
  const double r = gc_distance(s, center);
  if (r == 0.0) return {0.0, 0.0};
  const double dx = (s.lon - center.lon) * kKmPerDegree *
                    std::cos(center.lat * kDegToRad);
  const double dy = (s.lat - center.lat) * kKmPerDegree;
  double theta = std::atan2(dy, dx);
  if (theta >= kPi) theta -= 2.0 * kPi;  // atan2 can return +pi
  return {r, theta};
}

LonLat polar_to_lonlat(LonLat center, double r_km, double theta) {
  check_lat(center, "polar_to_lonlat center");
  if (r_km < 0.0) throw InputError("polar_to_lonlat: negative radius");
  if (r_km == 0.0) return center;
  const double cx = std::cos(theta);
  const double cy = std::sin(theta);
  const double coslat = std::cos(center.lat * kDegToRad);
  auto point_at = [&](double rho) {
    return LonLat{center.lon + rho * cx / (kKmPerDegree * coslat),
                  center.lat + rho * cy / kKmPerDegree};
  };
  // The chart radius rho differs slightly from the great-circle radius;
  // solve gc_distance(point(rho), center) == r_km along the chart ray.
  double rho = r_km;
  for (int it = 0; it < 50; ++it) {
    const double d = gc_distance(point_at(rho), center);
    const double err = d - r_km;
    if (std::abs(err) < 1e-9) break;
    // d is near-linear in rho; a secant-style proportional update converges fast.
    rho *= r_km / d;
  }
  return point_at(rho);
}

double dist_to_coast(LonLat center, const std::vector<std::uint8_t>& mask,
                     const GridSpec& grid) {
  grid.validate();
  if (mask.size() != static_cast<std::size_t>(grid.n_cells())) {
    throw InputError("dist_to_coast: mask size mismatch");
  }
  bool any_land = false, any_sea = false;
  for (std::uint8_t m : mask) (m ? any_land : any_sea) = true;
  if (!any_land || !any_sea) {
    throw InputError("dist_to_coast: mask must contain both land and sea cells");
  }
  double best = std::numeric_limits<double>::infinity();
  auto cell = [&](int j, int i) { return mask[static_cast<std::size_t>(j) * grid.n_lon + i]; };
  for (int j = 0; j < grid.n_lat; ++j) {
    for (int i = 0; i < grid.n_lon; ++i) {
      const std::uint8_t v = cell(j, i);
      const bool boundary = (i > 0 && cell(j, i - 1) != v) ||
                            (i + 1 < grid.n_lon && cell(j, i + 1) != v) ||
                            (j > 0 && cell(j - 1, i) != v) ||
                            (j + 1 < grid.n_lat && cell(j + 1, i) != v);
      if (!boundary) continue;
      best = std::min(best, gc_distance(center, {grid.lon(i), grid.lat(j)}));
    }
  }
  return best;
}

}  // namespace tcgen::core
