#include "tcgen/core/types.hpp"

#include <cmath>

namespace tcgen::core {

void GridSpec::validate() const {
  if (n_lon < 2 || n_lat < 2) throw InputError("GridSpec: n_lon and n_lat must be >= 2");
  if (!(d_lon > 0.0) || !(d_lat > 0.0)) throw InputError("GridSpec: d_lon and d_lat must be > 0");
  if (!std::isfinite(lon0) || !std::isfinite(lat0)) throw InputError("GridSpec: non-finite origin");
}

void FieldStack::validate(bool require_nonnegative) const {
  grid.validate();
  if (times.empty()) throw InputError("FieldStack: no time steps");
  for (std::size_t t = 1; t < times.size(); ++t) {
    if (times[t] - times[t - 1] != 3600) {
      throw FormatError("FieldStack: times must be strictly hourly (offence at index " +
                        std::to_string(t) + ")");
    }
  }
  const std::size_t expected =
      times.size() * static_cast<std::size_t>(grid.n_cells());
  if (values.size() != expected) {
    throw FormatError("FieldStack: value count " + std::to_string(values.size()) +
                      " != expected " + std::to_string(expected));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw FormatError("FieldStack: non-finite value at flat index " + std::to_string(i));
    }
    if (require_nonnegative && values[i] < 0.0) {
      throw FormatError("FieldStack: negative value at flat index " + std::to_string(i));
    }
  }
  if (!mask.empty() && mask.size() != static_cast<std::size_t>(grid.n_cells())) {
    throw FormatError("FieldStack: mask size mismatch");
  }
}

void StormTrack::validate() const {
  if (points.empty()) throw InputError("StormTrack: empty");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const TrackPoint& p = points[i];
    const double vals[] = {p.lon, p.lat, p.rmax_km, p.pdef_hpa,
                           p.dir_u, p.dir_v, p.dist_coast_km};
    for (double v : vals) {
      if (!std::isfinite(v)) {
        throw FormatError("StormTrack: non-finite value at row " + std::to_string(i));
      }
    }
    if (!(p.rmax_km > 0.0)) throw FormatError("StormTrack: rmax_km <= 0 at row " + std::to_string(i));
    if (p.pdef_hpa < 0.0) throw FormatError("StormTrack: pdef_hpa < 0 at row " + std::to_string(i));
    if (p.dist_coast_km < 0.0) throw FormatError("StormTrack: dist_coast_km < 0 at row " + std::to_string(i));
    if (i > 0 && points[i].time <= points[i - 1].time) {
      throw FormatError("StormTrack: non-monotone times at row " + std::to_string(i));
    }
  }
}

}  // namespace tcgen::core
