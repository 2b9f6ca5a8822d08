#include "tcgen/trackextract/trackextract.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "tcgen/common.hpp"
#include "tcgen/core/geodesy.hpp"

namespace tcgen::trackextract {

using core::FieldStack;
using core::GridSpec;
using core::LonLat;
using core::StormTrack;
using core::TrackPoint;

std::vector<double> smooth_field(const double* field, const GridSpec& grid,
                                 double bandwidth_cells) {
  if (!(bandwidth_cells > 0.0)) throw InputError("smooth_field: bandwidth must be > 0");
  const int half = std::max(1, static_cast<int>(std::ceil(4.0 * bandwidth_cells)));
  std::vector<double> taps(2 * half + 1);
  for (int k = -half; k <= half; ++k) {
    taps[k + half] = std::exp(-std::abs(k) / bandwidth_cells);
  }
  // The kernel is separable; renormalizing each 1-D pass over available
  // support equals 2-D renormalization on the truncated rectangle.
  auto pass = [&](const std::vector<double>& in, int n_major, int n_minor,
                  auto index) {
    std::vector<double> out(in.size());
    for (int a = 0; a < n_major; ++a) {
      for (int b = 0; b < n_minor; ++b) {
        double num = 0.0, den = 0.0;
        const int lo = std::max(0, b - half), hi = std::min(n_minor - 1, b + half);
        for (int c = lo; c <= hi; ++c) {
          const double w = taps[c - b + half];
          num += w * in[index(a, c)];
          den += w;
        }
        out[index(a, b)] = num / den;
      }
    }
    return out;
  };
  std::vector<double> tmp(field, field + grid.n_cells());
  tmp = pass(tmp, grid.n_lat, grid.n_lon,
             [&](int j, int i) { return static_cast<std::size_t>(j) * grid.n_lon + i; });
  tmp = pass(tmp, grid.n_lon, grid.n_lat,
             [&](int i, int j) { return static_cast<std::size_t>(j) * grid.n_lon + i; });
  return tmp;
}

std::vector<double> curl(const double* u, const double* v, const GridSpec& grid) {
  grid.validate();
  if (grid.n_lon < 3 || grid.n_lat < 3) throw InputError("curl: grid must be at least 3x3");
  const double m_per_deg = core::kKmPerDegree * 1000.0;
  const double dy = grid.d_lat * m_per_deg;
  std::vector<double> out(static_cast<std::size_t>(grid.n_cells()));
  auto at = [&](const double* f, int j, int i) {
    return f[static_cast<std::size_t>(j) * grid.n_lon + i];
  };
  // Second-order one-sided difference at edges, central inside.
  auto deriv = [](double fm, double f0, double fp, int where, double h) {
    switch (where) {
      case -1: return (-3.0 * fm + 4.0 * f0 - fp) / (2.0 * h);  // fm is the edge value
      case 1: return (3.0 * fp - 4.0 * f0 + fm) / (2.0 * h);    // fp is the edge value
      default: return (fp - fm) / (2.0 * h);
    }
  };
  for (int j = 0; j < grid.n_lat; ++j) {
    const double dx = grid.d_lon * m_per_deg *
                      std::cos(grid.lat(j) * core::kPi / 180.0);
    for (int i = 0; i < grid.n_lon; ++i) {
      double dvdx, dudy;
      if (i == 0) {
        dvdx = deriv(at(v, j, 0), at(v, j, 1), at(v, j, 2), -1, dx);
      } else if (i == grid.n_lon - 1) {
        dvdx = deriv(at(v, j, i - 2), at(v, j, i - 1), at(v, j, i), 1, dx);
      } else {
        dvdx = deriv(at(v, j, i - 1), 0.0, at(v, j, i + 1), 0, dx);
      }
      if (j == 0) {
        dudy = deriv(at(u, 0, i), at(u, 1, i), at(u, 2, i), -1, dy);
      } else if (j == grid.n_lat - 1) {
        dudy = deriv(at(u, j - 2, i), at(u, j - 1, i), at(u, j, i), 1, dy);
      } else {
        dudy = deriv(at(u, j - 1, i), 0.0, at(u, j + 1, i), 0, dy);
      }
      out[static_cast<std::size_t>(j) * grid.n_lon + i] = dvdx - dudy;
    }
  }
  return out;
}

LonLat detect_center(const double* curl_field, const GridSpec& grid,
                     LonLat reference_center, double window_deg) {
  grid.validate();
  int best_i = -1, best_j = -1;
  double best = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid.n_lat; ++j) {
    if (std::abs(grid.lat(j) - reference_center.lat) > window_deg) continue;
    for (int i = 0; i < grid.n_lon; ++i) {
      if (std::abs(grid.lon(i) - reference_center.lon) > window_deg) continue;
      const double c = curl_field[static_cast<std::size_t>(j) * grid.n_lon + i];
      if (c > best) {  // strict: first (lowest lat, then lon) wins ties
        best = c;
        best_i = i;
        best_j = j;
      }
    }
  }
  if (best_i < 0) throw InputError("detect_center: no grid cell inside the search window");
  return {grid.lon(best_i), grid.lat(best_j)};
}

double SplineFit::operator()(double t) const {
  const int n = static_cast<int>(knots.size());
  auto slope_at = [&](int i) {
    const double h = knots[i + 1] - knots[i];
    return (fitted[i + 1] - fitted[i]) / h -
           h / 6.0 * (2.0 * second_deriv[i] + second_deriv[i + 1]);
  };
  if (t <= knots.front()) return fitted.front() + (t - knots.front()) * slope_at(0);
  if (t >= knots.back()) {
    const double h = knots[n - 1] - knots[n - 2];
    const double slope = (fitted[n - 1] - fitted[n - 2]) / h +
                         h / 6.0 * (2.0 * second_deriv[n - 1] + second_deriv[n - 2]);
    return fitted.back() + (t - knots.back()) * slope;
  }
  const int i = static_cast<int>(std::upper_bound(knots.begin(), knots.end(), t) -
                                 knots.begin()) - 1;
  const double h = knots[i + 1] - knots[i];
  const double a = (knots[i + 1] - t) / h;
  const double b = (t - knots[i]) / h;
  return a * fitted[i] + b * fitted[i + 1] +
         ((a * a * a - a) * second_deriv[i] + (b * b * b - b) * second_deriv[i + 1]) *
             h * h / 6.0;
}

namespace {

struct SplineSystem {
  Eigen::MatrixXd K;   // penalty matrix, n x n
  Eigen::MatrixXd Qt;  // (n-2) x n second-difference operator
  Eigen::MatrixXd R;   // (n-2) x (n-2)
};

SplineSystem build_system(const std::vector<double>& t) {
  const int n = static_cast<int>(t.size());
  SplineSystem s;
  s.Qt = Eigen::MatrixXd::Zero(n - 2, n);
  s.R = Eigen::MatrixXd::Zero(n - 2, n - 2);
  for (int i = 0; i < n - 2; ++i) {
    const double h0 = t[i + 1] - t[i];
    const double h1 = t[i + 2] - t[i + 1];
    s.Qt(i, i) = 1.0 / h0;
    s.Qt(i, i + 1) = -(1.0 / h0 + 1.0 / h1);
    s.Qt(i, i + 2) = 1.0 / h1;
    s.R(i, i) = (h0 + h1) / 3.0;
    if (i + 1 < n - 2) {
      s.R(i, i + 1) = h1 / 6.0;
      s.R(i + 1, i) = h1 / 6.0;
    }
  }
  s.K = s.Qt.transpose() * s.R.ldlt().solve(s.Qt);
  return s;
}

}  // namespace

SplineFit smoothing_spline(const std::vector<double>& t, const std::vector<double>& y,
                           std::optional<double> lambda) {
  const int n = static_cast<int>(t.size());
  if (n < 4) throw InputError("smoothing_spline: need at least 4 points");
  if (y.size() != t.size()) throw InputError("smoothing_spline: t/y length mismatch");
  for (int i = 1; i < n; ++i) {
    if (!(t[i] > t[i - 1])) throw InputError("smoothing_spline: t must be strictly increasing");
  }
  if (lambda && *lambda < 0.0) throw InputError("smoothing_spline: lambda must be >= 0");

  const SplineSystem sys = build_system(t);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

  auto fit_at = [&](double lam) {
    return Eigen::VectorXd((I + lam * sys.K).ldlt().solve(yv));
  };
  auto gcv_at = [&](double lam) {
    const Eigen::MatrixXd Sinv = (I + lam * sys.K).ldlt().solve(I);
    const Eigen::VectorXd f = Sinv * yv;
    const double rss = (yv - f).squaredNorm();
    const double denom = n - Sinv.trace();
    if (denom <= 1e-9) return std::numeric_limits<double>::infinity();
    return n * rss / (denom * denom);
  };

  double lam;
  if (lambda) {
    lam = *lambda;
  } else {
    // GCV over a log grid scaled to the knot spacing, then golden refinement.
    const double scale = std::pow((t.back() - t.front()) / (n - 1), 3);
    double best = std::numeric_limits<double>::infinity();
    double best_e = 0.0;
    for (double e = -6.0; e <= 8.0; e += 0.5) {
      const double g = gcv_at(scale * std::pow(10.0, e));
      if (g < best) {
        best = g;
        best_e = e;
      }
    }
    double lo = best_e - 0.5, hi = best_e + 0.5;
    const double gr = 0.6180339887498949;
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    double fa = gcv_at(scale * std::pow(10.0, a)), fb = gcv_at(scale * std::pow(10.0, b));
    for (int it = 0; it < 40; ++it) {
      if (fa < fb) {
        hi = b; b = a; fb = fa;
        a = hi - gr * (hi - lo);
        fa = gcv_at(scale * std::pow(10.0, a));
      } else {
        lo = a; a = b; fa = fb;
        b = lo + gr * (hi - lo);
        fb = gcv_at(scale * std::pow(10.0, b));
      }
    }
    lam = scale * std::pow(10.0, 0.5 * (lo + hi));
  }

  SplineFit fit;
  fit.knots = t;
  fit.lambda = lam;
  const Eigen::VectorXd f = fit_at(lam);
  fit.fitted.assign(f.data(), f.data() + n);
  const Eigen::VectorXd gamma = sys.R.ldlt().solve(sys.Qt * f);
  fit.second_deriv.assign(n, 0.0);
  for (int i = 0; i < n - 2; ++i) fit.second_deriv[i + 1] = gamma(i);
  return fit;
}

double radius_max_wind(const double* speed, const GridSpec& grid,
                       LonLat center, double search_km) {
  grid.validate();
  double best_speed = -std::numeric_limits<double>::infinity();
  double best_dist = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int j = 0; j < grid.n_lat; ++j) {
    for (int i = 0; i < grid.n_lon; ++i) {
      const double d = core::gc_distance({grid.lon(i), grid.lat(j)}, center);
      if (d > search_km) continue;
      const double s = speed[static_cast<std::size_t>(j) * grid.n_lon + i];
      if (s > best_speed || (s == best_speed && d < best_dist)) {
        best_speed = s;
        best_dist = d;
        found = true;
      }
    }
  }
  if (!found) throw InputError("radius_max_wind: no grid cell within search radius");
  return best_dist;
}

namespace {

/// Bilinear sample of a native-grid field at an arbitrary lon/lat, clamped
/// to the grid hull.
double sample_native(const double* field, const GridSpec& grid, LonLat p) {
  const double fx = std::clamp((p.lon - grid.lon0) / grid.d_lon, 0.0,
                               static_cast<double>(grid.n_lon - 1));
  const double fy = std::clamp((p.lat - grid.lat0) / grid.d_lat, 0.0,
                               static_cast<double>(grid.n_lat - 1));
  const int i0 = std::min(grid.n_lon - 2, static_cast<int>(fx));
  const int j0 = std::min(grid.n_lat - 2, static_cast<int>(fy));
  const double wx = fx - i0, wy = fy - j0;
  auto at = [&](int j, int i) { return field[static_cast<std::size_t>(j) * grid.n_lon + i]; };
  return (1 - wy) * ((1 - wx) * at(j0, i0) + wx * at(j0, i0 + 1)) +
         wy * ((1 - wx) * at(j0 + 1, i0) + wx * at(j0 + 1, i0 + 1));
}

}  // namespace

StormTrack extract_track(const FieldStack& u_stack, const FieldStack& v_stack,
                         const FieldStack& p_stack,
                         const std::vector<LonLat>& reference_centers,
                         const std::vector<std::uint8_t>& land_mask,
                         const ExtractConfig& cfg) {
  u_stack.validate();
  v_stack.validate();
  p_stack.validate();
  const GridSpec& grid = u_stack.grid;
  if (v_stack.grid != grid || p_stack.grid != grid) {
    throw InputError("extract_track: stacks must share one grid");
  }
  const int T = u_stack.n_t();
  if (v_stack.n_t() != T || p_stack.n_t() != T ||
      static_cast<int>(reference_centers.size()) != T) {
    throw InputError("extract_track: stacks and reference centers must be time-aligned");
  }
  if (T < 4) throw InputError("extract_track: need at least 4 hours");
  // Empty mask means no coastline on the grid: dist_coast_km stays 0.
  if (!land_mask.empty() &&
      land_mask.size() != static_cast<std::size_t>(grid.n_cells())) {
    throw InputError("extract_track: land mask must cover the native grid");
  }

  std::vector<double> raw_lon(T), raw_lat(T), raw_rmax(T);
  std::vector<std::vector<double>> smooth_speed(T);
  for (int t = 0; t < T; ++t) {
    const auto su = smooth_field(u_stack.slice(t), grid, cfg.smooth_bandwidth_cells);
    const auto sv = smooth_field(v_stack.slice(t), grid, cfg.smooth_bandwidth_cells);
    const auto zeta = curl(su.data(), sv.data(), grid);
    const LonLat c = detect_center(zeta.data(), grid, reference_centers[t],
                                   cfg.center_window_deg);
    raw_lon[t] = c.lon;
    raw_lat[t] = c.lat;
    smooth_speed[t].resize(su.size());
    for (std::size_t i = 0; i < su.size(); ++i) {
      smooth_speed[t][i] = std::hypot(su[i], sv[i]);
    }
  }

  std::vector<double> hours(T);
  for (int t = 0; t < T; ++t) hours[t] = static_cast<double>(t);
  const SplineFit lon_fit = smoothing_spline(hours, raw_lon);
  const SplineFit lat_fit = smoothing_spline(hours, raw_lat);

  for (int t = 0; t < T; ++t) {
    raw_rmax[t] = radius_max_wind(smooth_speed[t].data(), grid,
                                  {lon_fit.fitted[t], lat_fit.fitted[t]},
                                  cfg.rmax_search_km);
  }
  const SplineFit rmax_fit = smoothing_spline(hours, raw_rmax);

  StormTrack track;
  track.points.resize(T);
  for (int t = 0; t < T; ++t) {
    TrackPoint& p = track.points[t];
    p.time = u_stack.times[t];
    p.lon = lon_fit.fitted[t];
    p.lat = lat_fit.fitted[t];
    p.rmax_km = std::clamp(rmax_fit.fitted[t], 1e-3, cfg.rmax_search_km);
    const int ref = (t == 0) ? 1 : t;
    p.dir_u = lon_fit.fitted[ref] - lon_fit.fitted[ref - 1];
    p.dir_v = lat_fit.fitted[ref] - lat_fit.fitted[ref - 1];
    const double pc = sample_native(p_stack.slice(t), grid, {p.lon, p.lat});
    p.pdef_hpa = std::max(0.0, 1013.0 - pc);
    p.dist_coast_km =
        land_mask.empty() ? 0.0 : core::dist_to_coast({p.lon, p.lat}, land_mask, grid);
  }
  track.validate();
  return track;
}

}  // namespace tcgen::trackextract
