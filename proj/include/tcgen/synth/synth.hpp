#pragma once

#include <cstdint>
#include <vector>

#include "tcgen/core/types.hpp"

namespace tcgen::synth {

/// Analytically controlled test storm: a Rankine-like vortex advected along
/// a waypoint track with a known asymmetric rainfall profile.
struct VortexParams {
  std::vector<core::LonLat> waypoints;  // visited evenly in time
  double rmax_km = 50.0;
  double peak_wind = 40.0;     // m/s at rmax
  double peak_rain = 20.0;     // mm/hr at rmax along the symmetric profile
  double pdef_hpa = 40.0;      // pressure deficit at the center
  double asym_amp = 0.0;       // a in (1 + a cos(theta - phase))
  double asym_phase = 0.0;
  double noise = 0.0;          // multiplicative gamma noise std dev (mean 1)
  int duration_h = 48;
  core::GridSpec grid;
  double coast_lat = 1e9;      // land where lat >= coast_lat; off-grid = all sea
  std::int64_t t0 = 1125273600;  // first hour (epoch seconds)
};

struct SynthEvent {
  core::FieldStack u, v, p, precip;
  core::StormTrack truth;
};

/// Generates wind/pressure/precipitation stacks plus the exact truth track.
SynthEvent make_vortex_event(const VortexParams& params, std::uint64_t seed);

}  // namespace tcgen::synth
