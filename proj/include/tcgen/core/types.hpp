#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tcgen/common.hpp"

namespace tcgen::core {

/// Kilometres per degree of latitude on the reference sphere.
inline constexpr double kKmPerDegree = 111.195;

/// IUGG mean Earth radius, km.
inline constexpr double kEarthRadiusKm = 6371.0088;

inline constexpr double kPi = 3.14159265358979323846;

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;
};

/// Regular lon-lat grid of cell centers.
struct GridSpec {
  int n_lon = 0;
  int n_lat = 0;
  double lon0 = 0.0;  // center of the first (westmost) column
  double lat0 = 0.0;  // center of the first (southmost) row
  double d_lon = 0.0;
  double d_lat = 0.0;

  void validate() const;
  double lon(int i) const { return lon0 + i * d_lon; }
  double lat(int j) const { return lat0 + j * d_lat; }
  int n_cells() const { return n_lon * n_lat; }
  bool operator==(const GridSpec&) const = default;
};

/// Time-ordered stack of 2-D fields on a fixed lon-lat grid.
///
/// Values are stored time-major, then latitude row, then longitude column.
struct FieldStack {
  GridSpec grid;
  std::vector<std::int64_t> times;  // Unix epoch seconds, strictly hourly
  std::vector<double> values;       // n_t * n_lat * n_lon
  std::string units;
  std::vector<std::uint8_t> mask;  // empty, or n_lat * n_lon (1 = land)

  int n_t() const { return static_cast<int>(times.size()); }
  double& at(int t, int j_lat, int i_lon) {
    return values[(static_cast<std::size_t>(t) * grid.n_lat + j_lat) * grid.n_lon + i_lon];
  }
  double at(int t, int j_lat, int i_lon) const {
    return values[(static_cast<std::size_t>(t) * grid.n_lat + j_lat) * grid.n_lon + i_lon];
  }
  /// Pointer to the n_lat*n_lon slice for hour t.
  const double* slice(int t) const {
    return values.data() + static_cast<std::size_t>(t) * grid.n_cells();
  }
  double* slice(int t) {
    return values.data() + static_cast<std::size_t>(t) * grid.n_cells();
  }

  void validate(bool require_nonnegative = false) const;
};

/// Per-hour storm predictor record, IBTrACS-style.
struct TrackPoint {
  std::int64_t time = 0;  // Unix epoch seconds
  double lon = 0.0;
  double lat = 0.0;
  double rmax_km = 0.0;
  double pdef_hpa = 0.0;
  double dir_u = 0.0;  // lon displacement, degrees/hour
  double dir_v = 0.0;  // lat displacement, degrees/hour
  double dist_coast_km = 0.0;
};

struct StormTrack {
  std::vector<TrackPoint> points;

  int size() const { return static_cast<int>(points.size()); }
  const TrackPoint& operator[](int i) const { return points[i]; }
  TrackPoint& operator[](int i) { return points[i]; }

  void validate() const;

  /// Predictor vector for hour i: rmax, pdef, dir_u, dir_v,
  /// center lon (U), center lat (V), distance to coast.
  static constexpr int kNumFeatures = 7;
  std::array<double, kNumFeatures> features(int i) const {
    const TrackPoint& p = points[i];
    return {p.rmax_km, p.pdef_hpa, p.dir_u, p.dir_v, p.lon, p.lat, p.dist_coast_km};
  }
};

/// Storm-centered regular polar grid, cell centers in r and theta.
struct PolarGridSpec {
  int n_r = 100;
  int n_theta = 100;
  double r_max_km = 1000.0;

  double dr() const { return r_max_km / n_r; }
  double dtheta() const { return 2.0 * kPi / n_theta; }
  double radius(int k) const { return (k + 0.5) * dr(); }
  double theta(int j) const { return -kPi + (j + 0.5) * dtheta(); }
  int n_cells() const { return n_r * n_theta; }
  bool operator==(const PolarGridSpec&) const = default;
};

/// One hour of values on the polar grid, r-major then theta.
struct PolarField {
  PolarGridSpec spec;
  std::vector<double> values;  // n_r * n_theta

  PolarField() = default;
  explicit PolarField(PolarGridSpec s)
      : spec(s), values(static_cast<std::size_t>(s.n_cells()), 0.0) {}

  double& at(int k_r, int j_theta) {
    return values[static_cast<std::size_t>(k_r) * spec.n_theta + j_theta];
  }
  double at(int k_r, int j_theta) const {
    return values[static_cast<std::size_t>(k_r) * spec.n_theta + j_theta];
  }
};

}  // namespace tcgen::core
