#include "tcgen/pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "tcgen/core/geodesy.hpp"
#include "tcgen/parallel.hpp"
#include "tcgen/verify/verify.hpp"

namespace tcgen::pipeline {

using core::FieldStack;
using core::GridSpec;
using core::LonLat;
using core::PolarField;
using core::StormTrack;

namespace {

std::uint64_t stage_seed(std::uint64_t root, std::uint64_t salt) {
  // SplitMix64 step; keeps per-stage forest/AR seeds decorrelated.
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void check_event(const Event& ev) {
  ev.precip.validate(true);
  ev.track.validate();
  if (ev.precip.n_t() != ev.track.size()) {
    throw InputError("event " + ev.id + ": track length " + std::to_string(ev.track.size()) +
                     " != field stack length " + std::to_string(ev.precip.n_t()));
  }
}

}  // namespace

void FittedModel::validate() const {
  if (basis.L < 1) throw InputError("FittedModel: L must be >= 1");
  if (static_cast<int>(forests.size()) != basis.L ||
      static_cast<int>(pc_ar.size()) != basis.L) {
    throw InputError("FittedModel: per-EOF component count mismatch");
  }
  for (const auto& p : pc_ar) {
    if (!(std::abs(p.phi) < 1.0)) throw InputError("FittedModel: |phi| must be < 1");
  }
  if (!(std::abs(residual.phi_bar) < 1.0)) {
    throw InputError("FittedModel: |phi_bar| must be < 1");
  }
  if (!(gamma.shape > 0.0 && gamma.rate > 0.0)) {
    throw InputError("FittedModel: gamma parameters must be positive");
  }
}

std::vector<PolarField> regrid_event(const Event& event,
                                     const regrid::KrigeConfig& krige, int threads,
                                     const core::PolarGridSpec& polar) {
  check_event(event);
  std::vector<PolarField> out;
  out.reserve(static_cast<std::size_t>(event.precip.n_t()));
  for (int t = 0; t < event.precip.n_t(); ++t) {
    const LonLat center{event.track[t].lon, event.track[t].lat};
    out.push_back(regrid::euclid_to_polar(event.precip.slice(t), event.precip.grid,
                                          center, krige, polar, threads));
  }
  return out;
}

FittedModel fit_model(const std::vector<Event>& events, const FitConfig& cfg) {
  std::vector<std::vector<PolarField>> polar_fields;
  polar_fields.reserve(events.size());
  for (const Event& ev : events) {
    polar_fields.push_back(regrid_event(ev, cfg.krige, cfg.threads));
  }
  return fit_model_polar(events, polar_fields, cfg);
}

FittedModel fit_model_polar(const std::vector<Event>& events,
                            const std::vector<std::vector<PolarField>>& polar_fields,
                            const FitConfig& cfg) {
  if (events.size() < 2) throw InputError("fit_model: need at least 2 events");
  if (polar_fields.size() != events.size()) {
    throw InputError("fit_model: polar field count mismatch");
  }
  for (std::size_t e = 0; e < events.size(); ++e) {
    check_event(events[e]);
    if (static_cast<int>(polar_fields[e].size()) != events[e].precip.n_t()) {
      throw InputError("fit_model: polar fields misaligned for event " + events[e].id);
    }
  }

  FittedModel model;
  model.cfg = cfg;
  model.polar = polar_fields.front().front().spec;
  for (const Event& ev : events) model.event_ids.push_back(ev.id);

  // EOF decomposition of the stacked polar data matrix.
  Eigen::MatrixXd P = eof::assemble_matrix(polar_fields);
  const int K = static_cast<int>(P.rows());
  const int T = static_cast<int>(P.cols());
  model.mean_field.assign(static_cast<std::size_t>(K), 0.0);
  if (cfg.center_eofs) {
    const Eigen::VectorXd mean = P.rowwise().mean();
    P.colwise() -= mean;
    for (int k = 0; k < K; ++k) model.mean_field[static_cast<std::size_t>(k)] = mean(k);
  }
  eof::EofResult eofs = eof::compute_eofs(P, cfg.n_eofs, model.polar);
  model.basis = std::move(eofs.basis);
  const int L = model.basis.L;

  // Predictor matrix, event order then hour order (matches column order).
  std::vector<double> X(static_cast<std::size_t>(T) * StormTrack::kNumFeatures);
  std::vector<int> event_lengths;
  {
    int row = 0;
    for (const Event& ev : events) {
      event_lengths.push_back(ev.track.size());
      for (int t = 0; t < ev.track.size(); ++t, ++row) {
        const auto f = ev.track.features(t);
        std::copy(f.begin(), f.end(),
                  X.begin() + static_cast<std::size_t>(row) * StormTrack::kNumFeatures);
      }
    }
  }

  // Trend forests and AR(1) residual dynamics per principal component.
  model.forests.resize(L);
  model.pc_ar.resize(L);
  std::vector<double> mu_hat(static_cast<std::size_t>(L) * T);
  for (int l = 0; l < L; ++l) {
    std::vector<double> y(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) y[t] = eofs.pcs[static_cast<std::size_t>(l) * T + t];
    rforest::ForestConfig fc = cfg.forest;
    fc.seed = stage_seed(cfg.seed, static_cast<std::uint64_t>(l));
    model.forests[l] = rforest::fit_forest(X, y, StormTrack::kNumFeatures, fc, cfg.threads);
    std::vector<std::vector<double>> segments;
    int offset = 0;
    for (int len : event_lengths) {
      std::vector<double> seg(len);
      for (int t = 0; t < len; ++t) {
        const double mu = rforest::predict(model.forests[l],
                                           X.data() + static_cast<std::size_t>(offset + t) *
                                                          StormTrack::kNumFeatures);
        mu_hat[static_cast<std::size_t>(l) * T + offset + t] = mu;
        seg[t] = y[offset + t] - mu;
      }
      segments.push_back(std::move(seg));
      offset += len;
    }
    model.pc_ar[l] = ar1::fit_ar1(segments);
  }

  // Residual process: harmonic coefficients and their second-moment model.
  std::vector<PolarField> all_polar;
  for (std::size_t e = 0; e < events.size(); ++e) {
    for (const PolarField& pf : polar_fields[e]) {
      PolarField y = pf;
      if (cfg.center_eofs) {
        for (int k = 0; k < K; ++k) y.values[k] -= model.mean_field[k];
      }
      all_polar.push_back(std::move(y));
    }
  }
  const auto residuals = circular::residual_fields(all_polar, model.basis, mu_hat);
  const auto coeffs = circular::fit_all_harmonics(residuals, cfg.n_harmonics, cfg.threads);
  model.residual = circular::estimate_residual_model(coeffs, event_lengths);

  // Gamma marginal from positive training precipitation on the native grid.
  std::vector<double> positives;
  for (const Event& ev : events) {
    for (double v : ev.precip.values) {
      if (v > 0.0) positives.push_back(v);
    }
  }
  if (positives.size() < 2) throw InputError("fit_model: too few positive precipitation values");
  model.gamma = marginal::fit_gamma(positives);

  model.validate();
  return model;
}

std::vector<FieldStack> simulate_event(const FittedModel& model, const StormTrack& track,
                                       const GridSpec& grid, int ensemble_size,
                                       std::uint64_t seed, int threads,
                                       const SimOptions& opts) {
  model.validate();
  track.validate();
  grid.validate();
  if (ensemble_size < 1) throw InputError("simulate_event: ensemble size must be >= 1");
  const int T = track.size();
  const int L = model.basis.L;
  const int cells = grid.n_cells();

  std::vector<FieldStack> members(static_cast<std::size_t>(ensemble_size));
  parallel_for(static_cast<std::size_t>(ensemble_size), threads, [&](std::size_t e) {
    // Per-member coefficient noise and residual process streams.
    std::vector<std::vector<double>> w(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
      if (opts.zero_variance) {
        w[l].assign(static_cast<std::size_t>(T), 0.0);
      } else {
        Rng rng = Rng::derive(seed, "pc-noise", e, static_cast<std::uint64_t>(l));
        w[l] = ar1::simulate_ar1(model.pc_ar[l], T, rng);
      }
    }
    std::vector<PolarField> z_fields;
    if (!opts.zero_variance) {
      Rng rng = Rng::derive(seed, "residual", e);
      z_fields = circular::simulate_residual(model.residual, T, rng, model.polar);
    }

    FieldStack stack;
    stack.grid = grid;
    stack.units = "m";  // latent Gaussian field; relabelled after anamorphosis
    stack.times.resize(T);
    stack.values.assign(static_cast<std::size_t>(T) * cells, 0.0);
    for (int t = 0; t < T; ++t) {
      stack.times[t] = track[t].time;
      std::vector<double> c(static_cast<std::size_t>(L));
      const auto feats = track.features(t);
      for (int l = 0; l < L; ++l) {
        c[l] = rforest::predict(model.forests[l], feats.data()) + w[l][t];
      }
      PolarField pf = eof::reconstruct(model.basis, c);
      for (int k = 0; k < model.basis.K; ++k) pf.values[k] += model.mean_field[k];
      if (!z_fields.empty()) {
        for (int k = 0; k < model.basis.K; ++k) pf.values[k] += z_fields[t].values[k];
      }
      const auto native = regrid::polar_to_euclid(pf, {track[t].lon, track[t].lat}, grid);
      std::copy(native.begin(), native.end(), stack.slice(t));
    }
    members[e] = std::move(stack);
  });

  // Storm-specific F from the pooled positive latent values of the ensemble.
  std::vector<double> pool;
  for (const FieldStack& m : members) {
    for (double v : m.values) {
      if (v > 0.0) pool.push_back(v);
    }
  }
  if (pool.empty()) {
    throw NumericalError("simulate_event: degenerate storm, no positive values in ensemble");
  }
  const marginal::Ecdf F = marginal::Ecdf::from_positives(pool);

  // Anamorphosis and taper, hour by hour.
  std::vector<std::vector<double>> taper(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    taper[t] = marginal::taper_weights(grid, {track[t].lon, track[t].lat},
                                       track[t].rmax_km, model.cfg.taper);
  }
  parallel_for(members.size(), threads, [&](std::size_t e) {
    FieldStack& m = members[e];
    const auto precip = marginal::anamorphose(m.values, F, model.gamma);
    for (int t = 0; t < T; ++t) {
      double* s = m.values.data() + static_cast<std::size_t>(t) * cells;
      const double* p = precip.data() + static_cast<std::size_t>(t) * cells;
      for (int i = 0; i < cells; ++i) s[i] = p[i] * taper[t][i];
    }
    m.units = "mm/hr";
  });
  return members;
}

std::vector<CvCaseStudyPixel> default_case_study_pixels() {
  // Texas-coast layout: Port Arthur, Houston, Corpus Christi and the two
  // Galveston pixels (land side and water side).
  return {{-93.94, 29.88}, {-95.37, 29.76}, {-97.40, 27.80},
          {-94.80, 29.30}, {-94.70, 29.20}};
}

CvReport cross_validate(const std::vector<Event>& events, const CvConfig& cfg) {
  if (events.size() < 3) throw InputError("cross_validate: need at least 3 events");
  const FitConfig& fit_cfg = cfg.fit;
  const auto pixels = cfg.pixels.empty() ? default_case_study_pixels() : cfg.pixels;

  // Regridding is independent of the fold split, so compute it once.
  std::vector<std::vector<PolarField>> polar_fields;
  polar_fields.reserve(events.size());
  for (const Event& ev : events) {
    polar_fields.push_back(regrid_event(ev, fit_cfg.krige, fit_cfg.threads));
  }

  CvReport report;
  for (std::size_t hold = 0; hold < events.size(); ++hold) {
    std::vector<Event> train;
    std::vector<std::vector<PolarField>> train_polar;
    for (std::size_t e = 0; e < events.size(); ++e) {
      if (e == hold) continue;
      train.push_back(events[e]);
      train_polar.push_back(polar_fields[e]);
    }
    const FittedModel model = fit_model_polar(train, train_polar, fit_cfg);

    const Event& held = events[hold];
    const auto members = simulate_event(model, held.track, held.precip.grid,
                                        cfg.ensemble_size,
                                        stage_seed(fit_cfg.seed, 1000 + hold),
                                        fit_cfg.threads);
    report.folds.push_back(verify_ensemble(held, members, fit_cfg.taper, pixels,
                                           stage_seed(fit_cfg.seed, 2000 + hold)));
  }
  return report;
}

CvFoldReport verify_ensemble(const Event& observed,
                             const std::vector<FieldStack>& members,
                             const marginal::TaperConfig& taper_cfg,
                             const std::vector<CvCaseStudyPixel>& pixels,
                             std::uint64_t seed) {
  check_event(observed);
  if (members.empty()) throw InputError("verify_ensemble: no ensemble members");
  for (const FieldStack& m : members) {
    if (!(m.grid == observed.precip.grid) || m.n_t() != observed.precip.n_t()) {
      throw InputError("verify_ensemble: member misaligned with observation");
    }
  }

  {
    const Event& held = observed;

    // Taper the observed stack with its own track geometry.
    FieldStack obs = held.precip;
    const int T = obs.n_t();
    const int cells = obs.grid.n_cells();
    for (int t = 0; t < T; ++t) {
      const auto w = marginal::taper_weights(obs.grid, {held.track[t].lon, held.track[t].lat},
                                             held.track[t].rmax_km, taper_cfg);
      double* s = obs.slice(t);
      for (int i = 0; i < cells; ++i) s[i] *= w[i];
    }

    CvFoldReport fold;
    fold.event_id = held.id;

    // Occurrence probabilities and Brier statistics.
    std::vector<double> probs(static_cast<std::size_t>(T) * cells);
    std::vector<double> occur(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
      int n_pos = 0;
      for (const auto& m : members) n_pos += m.values[i] > 0.0 ? 1 : 0;
      probs[i] = static_cast<double>(n_pos) / static_cast<double>(members.size());
      occur[i] = obs.values[i] > 0.0 ? 1.0 : 0.0;
    }
    fold.brier_mean = verify::brier(probs, occur);
    fold.brier_histogram.assign(50, 0);
    for (int t = 0; t < T; ++t) {
      const std::span<const double> p(probs.data() + static_cast<std::size_t>(t) * cells,
                                      static_cast<std::size_t>(cells));
      const std::span<const double> o(occur.data() + static_cast<std::size_t>(t) * cells,
                                      static_cast<std::size_t>(cells));
      const double score = verify::brier(p, o);
      const int bin = std::min(49, static_cast<int>(score / 0.02));
      ++fold.brier_histogram[static_cast<std::size_t>(bin)];
    }

    // Verification rank histogram over all (cell, hour) pairs.
    verify::RankHistogram rh(static_cast<int>(members.size()));
    Rng rank_rng = Rng::derive(seed, "rank-ties");
    std::vector<double> vals(members.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
      for (std::size_t e = 0; e < members.size(); ++e) vals[e] = members[e].values[i];
      rh.add(obs.values[i], vals, rank_rng);
    }
    fold.rank_histogram = rh.counts();

    // Case-study pixels: Q-Q pairs of hourly precipitation.
    for (const auto& px : pixels) {
      const int i = std::clamp(static_cast<int>(std::lround((px.lon - obs.grid.lon0) / obs.grid.d_lon)),
                               0, obs.grid.n_lon - 1);
      const int j = std::clamp(static_cast<int>(std::lround((px.lat - obs.grid.lat0) / obs.grid.d_lat)),
                               0, obs.grid.n_lat - 1);
      std::vector<double> obs_series(static_cast<std::size_t>(T));
      std::vector<std::vector<double>> member_series(members.size(),
                                                     std::vector<double>(static_cast<std::size_t>(T)));
      for (int t = 0; t < T; ++t) {
        obs_series[t] = obs.at(t, j, i);
        for (std::size_t e = 0; e < members.size(); ++e) {
          member_series[e][t] = members[e].at(t, j, i);
        }
      }
      const auto qq = verify::qq_pairs(member_series, obs_series);
      fold.qq.push_back({px.lon, px.lat, qq.probs, qq.obs_quantiles,
                         qq.envelope_lo, qq.envelope_hi});
    }

    // Integrated-precipitation summaries.
    fold.integrated_obs = verify::integrated_series(obs);
    const auto band = verify::ensemble_band(members);
    fold.integrated_q05 = band.q05;
    fold.integrated_q25 = band.q25;
    fold.integrated_q50 = band.q50;
    fold.integrated_q75 = band.q75;
    fold.integrated_q95 = band.q95;
    const auto map_band = verify::integrated_map_band(members);
    fold.integrated_map_q05 = map_band.q05;
    fold.integrated_map_q95 = map_band.q95;

    return fold;
  }
}

}  // namespace tcgen::pipeline
