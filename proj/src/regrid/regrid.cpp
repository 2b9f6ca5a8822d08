#include "tcgen/regrid/regrid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "tcgen/common.hpp"
#include "tcgen/core/geodesy.hpp"
#include "tcgen/parallel.hpp"

namespace tcgen::regrid {

using core::GridSpec;
using core::LonLat;
using core::PolarField;
using core::PolarGridSpec;

namespace {
constexpr double kRadiusRescale = 100.0;  // km of radius per chart unit
}

void KrigeConfig::validate() const {
  if (!(range_scaled > 0.0)) throw InputError("KrigeConfig: range_scaled must be > 0");
  if (nugget_rel < 0.0) throw InputError("KrigeConfig: nugget must be >= 0");
  if (n_neighbors < 4) throw InputError("KrigeConfig: n_neighbors must be >= 4");
}

PolarField euclid_to_polar(const double* field, const GridSpec& grid,
                           LonLat center, const KrigeConfig& cfg,
                           const PolarGridSpec& polar, int threads) {
  cfg.validate();
  grid.validate();

  // Source cells within the polar support, mapped into the kriging chart.
  struct Source {
    double x, y, value;
  };
  std::vector<Source> src;
  src.reserve(static_cast<std::size_t>(grid.n_cells()));
  for (int j = 0; j < grid.n_lat; ++j) {
    for (int i = 0; i < grid.n_lon; ++i) {
      const auto pc = core::to_storm_polar({grid.lon(i), grid.lat(j)}, center);
      if (pc.r_km > polar.r_max_km) continue;
      const double rs = pc.r_km / kRadiusRescale;
      src.push_back({rs * std::cos(pc.theta), rs * std::sin(pc.theta),
                     field[static_cast<std::size_t>(j) * grid.n_lon + i]});
    }
  }
  const int m = cfg.n_neighbors;
  if (static_cast<int>(src.size()) < m) {
    throw InputError("euclid_to_polar: only " + std::to_string(src.size()) +
                     " source cells within " + std::to_string(polar.r_max_km) +
                     " km of center, need " + std::to_string(m));
  }

  // Nugget is relative to the field variance over the usable sources.
  double mean = 0.0;
  for (const Source& s : src) mean += s.value;
  mean /= static_cast<double>(src.size());
  double var = 0.0;
  for (const Source& s : src) var += (s.value - mean) * (s.value - mean);
  var /= static_cast<double>(src.size());
  const double nugget = var > 0.0 ? cfg.nugget_rel : 0.0;  // unit-sill covariance

  PolarField out(polar);
  const int n_nodes = polar.n_cells();
  parallel_for(static_cast<std::size_t>(n_nodes), threads, [&](std::size_t node) {
    const int k_r = static_cast<int>(node) / polar.n_theta;
    const int j_t = static_cast<int>(node) % polar.n_theta;
    const double rs = polar.radius(k_r) / kRadiusRescale;
    const double th = polar.theta(j_t);
    const double qx = rs * std::cos(th);
    const double qy = rs * std::sin(th);

    // n_neighbors nearest sources by chart distance.
    std::vector<int> idx(src.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto d2 = [&](int i) {
      const double dx = src[i].x - qx;
      const double dy = src[i].y - qy;
      return dx * dx + dy * dy;
    };
    std::nth_element(idx.begin(), idx.begin() + m, idx.end(),
                     [&](int a, int b) { return d2(a) < d2(b); });
    idx.resize(m);
    std::sort(idx.begin(), idx.end());  // stable neighbor order for determinism

    // Ordinary kriging with a Lagrange multiplier for the unit-sum constraint.
    Eigen::MatrixXd A(m + 1, m + 1);
    Eigen::VectorXd b(m + 1);
    for (int a = 0; a < m; ++a) {
      for (int c = a; c < m; ++c) {
        const double dx = src[idx[a]].x - src[idx[c]].x;
        const double dy = src[idx[a]].y - src[idx[c]].y;
        const double cov = std::exp(-std::sqrt(dx * dx + dy * dy) / cfg.range_scaled);
        A(a, c) = cov;
        A(c, a) = cov;
      }
      A(a, a) += nugget;
      A(a, m) = 1.0;
      A(m, a) = 1.0;
      const double dx = src[idx[a]].x - qx;
      const double dy = src[idx[a]].y - qy;
      b(a) = std::exp(-std::sqrt(dx * dx + dy * dy) / cfg.range_scaled);
    }
    A(m, m) = 0.0;
    b(m) = 1.0;

    Eigen::VectorXd w;
    bool ok = false;
    for (double jitter = 0.0; jitter <= 1e-6; jitter = (jitter == 0.0 ? 1e-10 : jitter * 10.0)) {
      Eigen::MatrixXd Aj = A;
      for (int a = 0; a < m; ++a) Aj(a, a) += jitter;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(Aj);
      if (lu.isInvertible()) {
        w = lu.solve(b);
        if (w.allFinite()) {
          ok = true;
          break;
        }
      }
    }
    if (!ok) {
      throw NumericalError("euclid_to_polar: singular kriging system at polar node (" +
                           std::to_string(k_r) + ", " + std::to_string(j_t) + ")");
    }
    double pred = 0.0;
    for (int a = 0; a < m; ++a) pred += w(a) * src[idx[a]].value;
    out.at(k_r, j_t) = pred;
  });
  return out;
}

double bilinear_polar_eval(const PolarField& pf, double r_km, double theta) {
  const PolarGridSpec& s = pf.spec;
  if (r_km < 0.0) throw InputError("bilinear_polar_eval: negative radius");
  if (r_km > s.r_max_km) return 0.0;

  // Radius: clamp to the cell-center range, linear in between.
  const double fr = r_km / s.dr() - 0.5;
  int k0;
  double wr;
  if (fr <= 0.0) {
    k0 = 0;
    wr = 0.0;
  } else if (fr >= s.n_r - 1) {
    k0 = s.n_r - 2;
    wr = 1.0;
  } else {
    k0 = static_cast<int>(std::floor(fr));
    wr = fr - k0;
  }

  // Angle: periodic, cells wrap from the last center back to the first.
  double t = std::fmod(theta + core::kPi, 2.0 * core::kPi);
  if (t < 0.0) t += 2.0 * core::kPi;
  const double ft = t / s.dtheta() - 0.5;
  int j0 = static_cast<int>(std::floor(ft));
  double wt = ft - j0;
  if (j0 < 0) j0 += s.n_theta;
  const int j1 = (j0 + 1) % s.n_theta;

  const double v00 = pf.at(k0, j0), v01 = pf.at(k0, j1);
  const double v10 = pf.at(k0 + 1, j0), v11 = pf.at(k0 + 1, j1);
  return (1.0 - wr) * ((1.0 - wt) * v00 + wt * v01) +
         wr * ((1.0 - wt) * v10 + wt * v11);
}

std::vector<double> polar_to_euclid(const PolarField& pf, LonLat center,
                                    const GridSpec& grid) {
  grid.validate();
  std::vector<double> out(static_cast<std::size_t>(grid.n_cells()), 0.0);
  for (int j = 0; j < grid.n_lat; ++j) {
    for (int i = 0; i < grid.n_lon; ++i) {
      const auto pc = core::to_storm_polar({grid.lon(i), grid.lat(j)}, center);
      if (pc.r_km > pf.spec.r_max_km) continue;
      out[static_cast<std::size_t>(j) * grid.n_lon + i] =
          bilinear_polar_eval(pf, pc.r_km, pc.theta);
    }
  }
  return out;
}

}  // namespace tcgen::regrid
