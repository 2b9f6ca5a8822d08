#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "tcgen/core/geodesy.hpp"
#include "tcgen/pipeline/pipeline.hpp"
#include "tcgen/synth/synth.hpp"

using namespace tcgen;
namespace fs = std::filesystem;

namespace {

std::vector<pipeline::Event> make_events(int n) {
  std::vector<pipeline::Event> events;
  for (int e = 0; e < n; ++e) {
    synth::VortexParams params;
    params.grid = {21, 21, -95.0, 23.0, 0.4, 0.4};
    params.duration_h = 10;
    params.noise = 0.3;
    params.asym_amp = 0.3;
    const double shift = 0.6 * e;
    params.waypoints = {{-92.5 + shift, 25.5}, {-90.5 + shift, 27.5}};
    const auto ev = synth::make_vortex_event(params, 100 + static_cast<std::uint64_t>(e));
    events.push_back({"storm" + std::to_string(e), ev.precip, ev.truth});
  }
  return events;
}

pipeline::FitConfig small_config() {
  pipeline::FitConfig cfg;
  cfg.n_eofs = 4;
  cfg.n_harmonics = 3;
  cfg.forest.n_trees = 20;
  cfg.seed = 42;
  cfg.threads = 4;
  return cfg;
}

// Fit once and share across test cases; estimation dominates the runtime.
const pipeline::FittedModel& shared_model() {
  static const pipeline::FittedModel model = pipeline::fit_model(make_events(3), small_config());
  return model;
}

std::vector<char> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* tag) {
    path = fs::temp_directory_path() / (std::string("tcgen_test_") + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("fitted model satisfies its structural invariants") {
  const auto& model = shared_model();
  model.validate();
  CHECK(model.basis.L == 4);
  CHECK(model.forests.size() == 4);
  CHECK(model.pc_ar.size() == 4);
  for (const auto& ar : model.pc_ar) {
    CHECK(std::abs(ar.phi) < 1.0);
    CHECK(ar.sigma2 >= 0.0);
  }
  CHECK(std::abs(model.residual.phi_bar) < 1.0);
  CHECK(model.gamma.shape > 0.0);
  CHECK(model.gamma.rate > 0.0);
  CHECK(model.event_ids == std::vector<std::string>{"storm0", "storm1", "storm2"});

  // Basis orthonormality survives the full pipeline.
  for (int a = 0; a < model.basis.L; ++a) {
    for (int b = 0; b <= a; ++b) {
      double dot = 0.0;
      for (int k = 0; k < model.basis.K; ++k) {
        dot += model.basis.pattern(a)[k] * model.basis.pattern(b)[k];
      }
      CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-8));
    }
  }

  // Without centering the mean field is all zeros.
  for (double v : model.mean_field) CHECK(v == 0.0);
}

TEST_CASE("simulated members are nonnegative and vanish beyond the taper") {
  const auto& model = shared_model();
  const auto events = make_events(3);
  const auto members = pipeline::simulate_event(model, events[0].track, events[0].precip.grid,
                                                4, 7, 4);
  REQUIRE(members.size() == 4);
  const auto& grid = events[0].precip.grid;
  const double beta = model.cfg.taper.beta;
  for (const auto& m : members) {
    CHECK(m.units == "mm/hr");
    CHECK(m.grid == grid);
    REQUIRE(m.n_t() == static_cast<int>(events[0].track.points.size()));
    for (int t = 0; t < m.n_t(); ++t) {
      const auto& tp = events[0].track.points[t];
      for (int j = 0; j < grid.n_lat; ++j) {
        for (int i = 0; i < grid.n_lon; ++i) {
          const double v = m.at(t, j, i);
          CHECK(v >= 0.0);
          const double r = core::gc_distance({grid.lon(i), grid.lat(j)}, {tp.lon, tp.lat});
          if (r >= beta * tp.rmax_km) CHECK(v == 0.0);
        }
      }
    }
  }

  // Members differ from each other.
  CHECK(members[0].values != members[1].values);
}

TEST_CASE("simulation is reproducible per seed and thread-count invariant") {
  const auto& model = shared_model();
  const auto events = make_events(1);
  const auto a = pipeline::simulate_event(model, events[0].track, events[0].precip.grid, 3, 9, 1);
  const auto b = pipeline::simulate_event(model, events[0].track, events[0].precip.grid, 3, 9, 4);
  const auto c = pipeline::simulate_event(model, events[0].track, events[0].precip.grid, 3, 10, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t e = 0; e < a.size(); ++e) CHECK(a[e].values == b[e].values);
  CHECK(a[0].values != c[0].values);
}

TEST_CASE("zero-variance simulation produces one deterministic mean storm") {
  const auto& model = shared_model();
  const auto events = make_events(1);
  pipeline::SimOptions opts;
  opts.zero_variance = true;
  const auto a = pipeline::simulate_event(model, events[0].track, events[0].precip.grid, 2, 1, 4,
                                          opts);
  // With W and Z suppressed every member is the same mean storm.
  REQUIRE(a.size() == 2);
  CHECK(a[0].values == a[1].values);
  // Independent of the seed too (same ensemble size: the pooled empirical CDF
  // used by the anamorphosis depends on the pool size).
  const auto b = pipeline::simulate_event(model, events[0].track, events[0].precip.grid, 2, 999,
                                          4, opts);
  CHECK(a[0].values == b[0].values);
}

TEST_CASE("model estimation is thread-count invariant") {
  const auto events = make_events(3);
  auto cfg = small_config();
  cfg.threads = 1;
  const auto m1 = pipeline::fit_model(events, cfg);
  const auto& m4 = shared_model();
  CHECK(m1.basis.patterns == m4.basis.patterns);
  CHECK(m1.basis.singular_values == m4.basis.singular_values);
  CHECK(m1.gamma.shape == m4.gamma.shape);
  CHECK(m1.residual.phi_bar == m4.residual.phi_bar);
  const auto a = pipeline::simulate_event(m1, events[0].track, events[0].precip.grid, 2, 5, 1);
  const auto b = pipeline::simulate_event(m4, events[0].track, events[0].precip.grid, 2, 5, 4);
  for (std::size_t e = 0; e < a.size(); ++e) CHECK(a[e].values == b[e].values);
}

TEST_CASE("model round-trips through its directory format") {
  const auto& model = shared_model();
  TempDir dir("model_io");
  pipeline::save_model(model, dir.path / "m1");
  const auto loaded = pipeline::load_model(dir.path / "m1");
  loaded.validate();
  CHECK(loaded.basis.patterns == model.basis.patterns);
  CHECK(loaded.basis.singular_values == model.basis.singular_values);
  CHECK(loaded.gamma.shape == model.gamma.shape);
  CHECK(loaded.gamma.rate == model.gamma.rate);
  CHECK(loaded.residual.phi_bar == model.residual.phi_bar);
  CHECK(loaded.event_ids == model.event_ids);
  CHECK(loaded.cfg.n_eofs == model.cfg.n_eofs);

  // The loaded model simulates bit-identically.
  const auto events = make_events(1);
  const auto a = pipeline::simulate_event(model, events[0].track, events[0].precip.grid, 2, 3, 2);
  const auto b = pipeline::simulate_event(loaded, events[0].track, events[0].precip.grid, 2, 3, 2);
  for (std::size_t e = 0; e < a.size(); ++e) CHECK(a[e].values == b[e].values);

  // Saving twice writes byte-identical artifacts.
  pipeline::save_model(model, dir.path / "m2");
  for (const auto& entry : fs::directory_iterator(dir.path / "m1")) {
    const auto other = dir.path / "m2" / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(read_bytes(entry.path()) == read_bytes(other));
  }
}

TEST_CASE("centered estimation stores the training mean field") {
  const auto events = make_events(3);
  auto cfg = small_config();
  cfg.center_eofs = true;
  const auto model = pipeline::fit_model(events, cfg);
  model.validate();
  double norm = 0.0;
  for (double v : model.mean_field) norm += v * v;
  CHECK(norm > 0.0);
  const auto members = pipeline::simulate_event(model, events[0].track, events[0].precip.grid,
                                                2, 11, 4);
  for (const auto& m : members) {
    for (double v : m.values) CHECK(v >= 0.0);
  }
}

TEST_CASE("cross-validation emits one fully populated report per event") {
  const auto events = make_events(3);
  pipeline::CvConfig cfg;
  cfg.fit = small_config();
  cfg.ensemble_size = 6;
  const auto report = pipeline::cross_validate(events, cfg);
  REQUIRE(report.folds.size() == 3);
  const int T = 10;
  for (std::size_t f = 0; f < 3; ++f) {
    const auto& fold = report.folds[f];
    CHECK(fold.event_id == events[f].id);
    CHECK(fold.brier_mean >= 0.0);
    CHECK(fold.brier_mean <= 1.0);
    CHECK(fold.brier_histogram.size() == 50);
    std::int64_t hist_total = 0;
    for (auto c : fold.brier_histogram) hist_total += c;
    CHECK(hist_total == T);
    CHECK(fold.rank_histogram.size() == 7);  // ensemble_size + 1
    std::int64_t rank_total = 0;
    for (auto c : fold.rank_histogram) rank_total += c;
    CHECK(rank_total == static_cast<std::int64_t>(T) * 21 * 21);
    CHECK(fold.qq.size() == pipeline::default_case_study_pixels().size());
    for (const auto& q : fold.qq) {
      CHECK(q.probs.size() == static_cast<std::size_t>(T));
      CHECK(q.obs_q.size() == q.probs.size());
      CHECK(q.env_lo.size() == q.probs.size());
      CHECK(q.env_hi.size() == q.probs.size());
    }
    CHECK(fold.integrated_obs.size() == static_cast<std::size_t>(T));
    CHECK(fold.integrated_q05.size() == static_cast<std::size_t>(T));
    CHECK(fold.integrated_q95.size() == static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
      CHECK(fold.integrated_q05[t] <= fold.integrated_q50[t]);
      CHECK(fold.integrated_q50[t] <= fold.integrated_q95[t]);
    }
    CHECK(fold.integrated_map_q05.size() == static_cast<std::size_t>(21 * 21));
    CHECK(fold.integrated_map_q95.size() == static_cast<std::size_t>(21 * 21));
  }

  // Fewer than three events cannot be cross-validated.
  CHECK_THROWS_AS(pipeline::cross_validate(make_events(2), cfg), InputError);
}
