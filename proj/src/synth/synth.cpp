#include "tcgen/synth/synth.hpp"

#include <cmath>

#include "tcgen/common.hpp"
#include "tcgen/core/geodesy.hpp"
#include "tcgen/marginal/marginal.hpp"
#include "tcgen/rng.hpp"

namespace tcgen::synth {

using core::FieldStack;
using core::GridSpec;
using core::LonLat;
using core::StormTrack;
using core::TrackPoint;

namespace {

LonLat track_position(const std::vector<LonLat>& waypoints, double frac) {
  if (waypoints.size() == 1) return waypoints.front();
  const double pos = frac * (static_cast<double>(waypoints.size()) - 1.0);
  const std::size_t i = std::min(waypoints.size() - 2,
                                 static_cast<std::size_t>(std::floor(pos)));
  const double w = pos - static_cast<double>(i);
  return {waypoints[i].lon + w * (waypoints[i + 1].lon - waypoints[i].lon),
          waypoints[i].lat + w * (waypoints[i + 1].lat - waypoints[i].lat)};
}

}  // namespace

SynthEvent make_vortex_event(const VortexParams& params, std::uint64_t seed) {
  if (params.duration_h < 4) throw InputError("make_vortex_event: duration must be >= 4 h");
  if (params.waypoints.empty()) throw InputError("make_vortex_event: no waypoints");
  if (!(params.rmax_km > 0.0)) throw InputError("make_vortex_event: rmax must be > 0");
  params.grid.validate();

  const GridSpec& grid = params.grid;
  const int T = params.duration_h;
  const int cells = grid.n_cells();

  // Land mask: land where lat >= coast_lat; dropped if it would be one-sided.
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(cells), 0);
  bool any_land = false, any_sea = false;
  for (int j = 0; j < grid.n_lat; ++j) {
    const bool land = grid.lat(j) >= params.coast_lat;
    (land ? any_land : any_sea) = true;
    for (int i = 0; i < grid.n_lon; ++i) {
      mask[static_cast<std::size_t>(j) * grid.n_lon + i] = land ? 1 : 0;
    }
  }
  const bool has_coast = any_land && any_sea;
  if (!has_coast) mask.clear();

  auto make_stack = [&](const char* units) {
    FieldStack s;
    s.grid = grid;
    s.units = units;
    s.times.resize(T);
    for (int t = 0; t < T; ++t) s.times[t] = params.t0 + 3600 * t;
    s.values.assign(static_cast<std::size_t>(T) * cells, 0.0);
    s.mask = mask;
    return s;
  };
  SynthEvent ev;
  ev.u = make_stack("m/s");
  ev.v = make_stack("m/s");
  ev.p = make_stack("hPa");
  ev.precip = make_stack("mm/hr");

  // Multiplicative gamma noise with mean 1 and variance noise^2.
  const double noise_shape = params.noise > 0.0 ? 1.0 / (params.noise * params.noise) : 0.0;
  Rng rng = Rng::derive(seed, "vortex");

  std::vector<LonLat> centers(T);
  for (int t = 0; t < T; ++t) {
    centers[t] = track_position(params.waypoints, T > 1 ? static_cast<double>(t) / (T - 1) : 0.0);
  }

  for (int t = 0; t < T; ++t) {
    const LonLat c = centers[t];
    for (int j = 0; j < grid.n_lat; ++j) {
      for (int i = 0; i < grid.n_lon; ++i) {
        const auto pc = core::to_storm_polar({grid.lon(i), grid.lat(j)}, c);
        const double r = pc.r_km;
        const std::size_t idx = static_cast<std::size_t>(j) * grid.n_lon + i;

        // Rankine-like tangential wind: linear rise to the peak, 1/r decay.
        const double speed = r <= params.rmax_km
                                 ? params.peak_wind * r / params.rmax_km
                                 : params.peak_wind * params.rmax_km / r;
        ev.u.slice(t)[idx] = -speed * std::sin(pc.theta);
        ev.v.slice(t)[idx] = speed * std::cos(pc.theta);

        const double half = r / (2.0 * params.rmax_km);
        ev.p.slice(t)[idx] = 1013.0 - params.pdef_hpa * std::exp(-half * half);

        const double rr = r / params.rmax_km;
        double rain = params.peak_rain * rr * std::exp(1.0 - rr) *
                      (1.0 + params.asym_amp * std::cos(pc.theta - params.asym_phase));
        if (noise_shape > 0.0 && rain > 0.0) {
          rain *= marginal::gamma_quantile({noise_shape, noise_shape}, rng.uniform());
        }
        ev.precip.slice(t)[idx] = std::max(0.0, rain);
      }
    }
  }

  ev.truth.points.resize(T);
  for (int t = 0; t < T; ++t) {
    TrackPoint& p = ev.truth.points[t];
    p.time = params.t0 + 3600 * t;
    p.lon = centers[t].lon;
    p.lat = centers[t].lat;
    p.rmax_km = params.rmax_km;
    p.pdef_hpa = params.pdef_hpa;
    const int ref = (t == 0) ? 1 : t;
    p.dir_u = centers[ref].lon - centers[ref - 1].lon;
    p.dir_v = centers[ref].lat - centers[ref - 1].lat;
    p.dist_coast_km = has_coast ? core::dist_to_coast(centers[t], mask, grid) : 0.0;
  }
  ev.truth.validate();
  return ev;
}

}  // namespace tcgen::synth
