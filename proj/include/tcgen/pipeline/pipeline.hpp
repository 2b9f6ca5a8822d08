#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tcgen/ar1/ar1.hpp"
#include "tcgen/circular/circular.hpp"
#include "tcgen/core/types.hpp"
#include "tcgen/eof/eof.hpp"
#include "tcgen/marginal/marginal.hpp"
#include "tcgen/regrid/regrid.hpp"
#include "tcgen/rforest/rforest.hpp"

namespace tcgen::pipeline {

struct Event {
  std::string id;
  core::FieldStack precip;
  core::StormTrack track;
};

struct FitConfig {
  int n_eofs = 13;
  bool center_eofs = false;
  int n_harmonics = 10;
  regrid::KrigeConfig krige;
  rforest::ForestConfig forest;
  marginal::TaperConfig taper;
  int ensemble_size = 100;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Complete serialized estimation output.
struct FittedModel {
  core::PolarGridSpec polar;
  eof::EofBasis basis;
  std::vector<double> mean_field;        // K, nonzero only when center_eofs
  std::vector<rforest::Forest> forests;  // one per retained EOF
  std::vector<ar1::Ar1Params> pc_ar;     // one per retained EOF
  circular::ResidualModel residual;
  marginal::GammaParams gamma;
  FitConfig cfg;
  std::vector<std::string> event_ids;

  void validate() const;
};

/// Regrids every hour of an event's precipitation stack to the polar grid.
std::vector<core::PolarField> regrid_event(const Event& event,
                                           const regrid::KrigeConfig& krige,
                                           int threads,
                                           const core::PolarGridSpec& polar = {});

/// Full stepwise estimation: regrid, EOF/SVD, per-PC forests and AR(1),
/// harmonic residual model, gamma marginal. Deterministic given cfg.seed.
FittedModel fit_model(const std::vector<Event>& events, const FitConfig& cfg);

/// Variant reusing precomputed polar fields (one vector per event).
FittedModel fit_model_polar(const std::vector<Event>& events,
                            const std::vector<std::vector<core::PolarField>>& polar_fields,
                            const FitConfig& cfg);

struct SimOptions {
  bool zero_variance = false;  // suppress W and Z draws (mean-only storms)
};

/// Simulates an ensemble of E precipitation stacks on the native grid for a
/// track. Member e is reproducible from (seed, e).
std::vector<core::FieldStack> simulate_event(const FittedModel& model,
                                             const core::StormTrack& track,
                                             const core::GridSpec& grid, int ensemble_size,
                                             std::uint64_t seed, int threads = 1,
                                             const SimOptions& opts = {});

struct CvCaseStudyPixel {
  double lon = 0.0;
  double lat = 0.0;
};

struct CvConfig {
  FitConfig fit;
  int ensemble_size = 100;
  std::vector<CvCaseStudyPixel> pixels;  // defaults applied when empty
};

struct CvFoldReport {
  std::string event_id;
  double brier_mean = 0.0;
  std::vector<std::int64_t> brier_histogram;  // per-hour scores, bin width 0.02
  std::vector<std::int64_t> rank_histogram;
  struct PixelQq {
    double lon, lat;
    std::vector<double> probs, obs_q, env_lo, env_hi;
  };
  std::vector<PixelQq> qq;
  std::vector<double> integrated_obs;
  std::vector<double> integrated_q05, integrated_q25, integrated_q50,
      integrated_q75, integrated_q95;
  std::vector<double> integrated_map_q05, integrated_map_q95;
};

struct CvReport {
  std::vector<CvFoldReport> folds;
};

/// Leave-one-storm-out cross-validation with the verification suite run
/// against each tapered held-out stack.
CvReport cross_validate(const std::vector<Event>& events, const CvConfig& cfg);

/// Full verification of an ensemble against one observed event. The observed
/// stack is tapered with its own track geometry before scoring.
CvFoldReport verify_ensemble(const Event& observed,
                             const std::vector<core::FieldStack>& members,
                             const marginal::TaperConfig& taper,
                             const std::vector<CvCaseStudyPixel>& pixels,
                             std::uint64_t seed);

/// FittedModel directory format: model.json plus one .f64 blob per array.
void save_model(const FittedModel& model, const std::filesystem::path& dir);
FittedModel load_model(const std::filesystem::path& dir);

/// CV report serialization.
void save_cv_report(const CvReport& report, const std::filesystem::path& path);

/// Events manifest: {"events": [{"id", "stack", "track"}]} with paths
/// relative to the manifest.
std::vector<Event> load_events_manifest(const std::filesystem::path& path);

/// Default case-study pixels (Texas-coast layout).
std::vector<CvCaseStudyPixel> default_case_study_pixels();

}  // namespace tcgen::pipeline
