// Command-line entry point: synth, extract-track, fit, simulate, cv, verify.
//
// Exit codes: 0 success, 1 input/format error, 2 numerical error. Outputs go
// only under the per-command output path; partial outputs are removed when a
// command fails.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tcgen/common.hpp"
#include "tcgen/core/io.hpp"
#include "tcgen/pipeline/pipeline.hpp"
#include "tcgen/rng.hpp"
#include "tcgen/synth/synth.hpp"
#include "tcgen/trackextract/trackextract.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tcgen;

namespace {

/// Removes the command's outputs if it throws, so failures leave no partial
/// files behind. Pre-existing paths are never removed.
class OutputGuard {
 public:
  void track(const fs::path& p) {
    if (!fs::exists(p)) created_.push_back(p);
  }
  void commit() { created_.clear(); }
  ~OutputGuard() {
    for (auto it = created_.rbegin(); it != created_.rend(); ++it) {
      std::error_code ec;
      fs::remove_all(*it, ec);
    }
  }

 private:
  std::vector<fs::path> created_;
};

json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

core::GridSpec grid_from_json(const json& j) {
  core::GridSpec g;
  g.n_lon = j.at("n_lon").get<int>();
  g.n_lat = j.at("n_lat").get<int>();
  g.lon0 = j.at("lon0").get<double>();
  g.lat0 = j.at("lat0").get<double>();
  g.d_lon = j.at("d_lon").get<double>();
  g.d_lat = j.at("d_lat").get<double>();
  g.validate();
  return g;
}

struct CommonFitFlags {
  pipeline::FitConfig cfg;

  void attach(CLI::App* cmd) {
    cmd->add_option("--n-eofs", cfg.n_eofs, "Number of retained spatial patterns");
    cmd->add_flag("--center-eofs", cfg.center_eofs,
                  "Subtract the mean polar field before the decomposition");
    cmd->add_option("--n-harmonics", cfg.n_harmonics, "Angular harmonics in the residual model");
    cmd->add_option("--krige-range", cfg.krige.range_scaled,
                    "Exponential covariance range (chart units)");
    cmd->add_option("--krige-neighbors", cfg.krige.n_neighbors, "Kriging neighborhood size");
    cmd->add_option("--krige-nugget", cfg.krige.nugget_rel, "Relative nugget variance");
    cmd->add_option("--trees", cfg.forest.n_trees, "Trees per forest");
    cmd->add_option("--mtry", cfg.forest.mtry, "Features tried per split");
    cmd->add_option("--min-node", cfg.forest.min_node, "Minimum leaf size");
    cmd->add_option("--taper-alpha", cfg.taper.alpha, "Taper plateau radius in rmax units");
    cmd->add_option("--taper-beta", cfg.taper.beta, "Taper cutoff radius in rmax units");
    cmd->add_option("--seed", cfg.seed, "Root random seed");
    cmd->add_option("--threads", cfg.threads, "Worker thread cap (results are thread-count invariant)");
  }
};

int run_synth(const fs::path& config_path, std::uint64_t seed, const fs::path& out) {
  const json cfg = load_json_file(config_path);
  if (!cfg.contains("events") || !cfg.at("events").is_array() || cfg.at("events").empty()) {
    throw FormatError(config_path.string() + ": missing nonempty \"events\" array");
  }
  const core::GridSpec default_grid =
      cfg.contains("grid") ? grid_from_json(cfg.at("grid")) : core::GridSpec{};

  OutputGuard guard;
  guard.track(out);
  fs::create_directories(out);

  json manifest_events = json::array();
  std::uint64_t index = 0;
  for (const json& je : cfg.at("events")) {
    synth::VortexParams p;
    p.grid = je.contains("grid") ? grid_from_json(je.at("grid")) : default_grid;
    for (const auto& wp : je.at("waypoints")) {
      p.waypoints.push_back({wp.at(0).get<double>(), wp.at(1).get<double>()});
    }
    if (je.contains("rmax_km")) p.rmax_km = je.at("rmax_km").get<double>();
    if (je.contains("peak_wind")) p.peak_wind = je.at("peak_wind").get<double>();
    if (je.contains("peak_rain")) p.peak_rain = je.at("peak_rain").get<double>();
    if (je.contains("pdef_hpa")) p.pdef_hpa = je.at("pdef_hpa").get<double>();
    if (je.contains("asym_amp")) p.asym_amp = je.at("asym_amp").get<double>();
    if (je.contains("asym_phase")) p.asym_phase = je.at("asym_phase").get<double>();
    if (je.contains("noise")) p.noise = je.at("noise").get<double>();
    if (je.contains("duration_h")) p.duration_h = je.at("duration_h").get<int>();
    if (je.contains("coast_lat")) p.coast_lat = je.at("coast_lat").get<double>();
    if (je.contains("t0")) p.t0 = core::parse_iso8601(je.at("t0").get<std::string>());

    const std::string id =
        je.contains("id") ? je.at("id").get<std::string>() : "event" + std::to_string(index);
    const std::uint64_t event_seed = seed + index;
    const synth::SynthEvent ev = synth::make_vortex_event(p, event_seed);

    core::write_field_stack(ev.u, out / (id + ".u.json"));
    core::write_field_stack(ev.v, out / (id + ".v.json"));
    core::write_field_stack(ev.p, out / (id + ".p.json"));
    core::write_field_stack(ev.precip, out / (id + ".precip.json"));
    core::write_track(ev.truth, out / (id + ".track.csv"));
    manifest_events.push_back(
        {{"id", id}, {"stack", id + ".precip.json"}, {"track", id + ".track.csv"}});
    ++index;
  }
  std::ofstream mout(out / "events.json");
  mout << json{{"events", manifest_events}}.dump(2) << '\n';
  if (!mout) throw InputError("write failed: " + (out / "events.json").string());

  guard.commit();
  return 0;
}

int run_extract_track(const fs::path& u_path, const fs::path& v_path, const fs::path& p_path,
                      const fs::path& ref_path, const fs::path& out,
                      const trackextract::ExtractConfig& cfg) {
  const core::FieldStack u = core::read_field_stack(u_path);
  const core::FieldStack v = core::read_field_stack(v_path);
  const core::FieldStack p = core::read_field_stack(p_path);
  const auto refs = core::read_reference_centers(ref_path);
  const core::StormTrack track = trackextract::extract_track(u, v, p, refs, p.mask, cfg);

  OutputGuard guard;
  guard.track(out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  core::write_track(track, out);
  guard.commit();
  return 0;
}

int run_fit(const fs::path& events_path, const fs::path& out, const pipeline::FitConfig& cfg) {
  const auto events = pipeline::load_events_manifest(events_path);
  const pipeline::FittedModel model = pipeline::fit_model(events, cfg);

  OutputGuard guard;
  guard.track(out);
  pipeline::save_model(model, out);
  guard.commit();
  return 0;
}

int run_simulate(const fs::path& model_dir, const fs::path& track_path,
                 const fs::path& grid_path, int n, std::uint64_t seed, int threads,
                 const fs::path& out) {
  const pipeline::FittedModel model = pipeline::load_model(model_dir);
  const core::StormTrack track = core::read_track(track_path);
  const core::GridSpec grid = core::read_grid_spec(grid_path);
  const auto members = pipeline::simulate_event(model, track, grid, n, seed, threads);

  OutputGuard guard;
  guard.track(out);
  fs::create_directories(out);
  for (std::size_t e = 0; e < members.size(); ++e) {
    core::write_field_stack(members[e], out / ("member_" + std::to_string(e) + ".json"));
  }
  guard.commit();
  return 0;
}

int run_cv(const fs::path& events_path, int n, const fs::path& report_path,
           const pipeline::FitConfig& fit_cfg) {
  const auto events = pipeline::load_events_manifest(events_path);
  pipeline::CvConfig cfg;
  cfg.fit = fit_cfg;
  cfg.ensemble_size = n;
  const pipeline::CvReport report = pipeline::cross_validate(events, cfg);

  OutputGuard guard;
  guard.track(report_path);
  if (report_path.has_parent_path()) fs::create_directories(report_path.parent_path());
  pipeline::save_cv_report(report, report_path);
  guard.commit();
  return 0;
}

int run_verify(const fs::path& obs_path, const fs::path& track_path, const fs::path& members_dir,
               std::uint64_t seed, const fs::path& report_path,
               const marginal::TaperConfig& taper) {
  pipeline::Event observed;
  observed.id = obs_path.stem().string();
  observed.precip = core::read_field_stack(obs_path);
  observed.track = core::read_track(track_path);

  std::vector<fs::path> manifests;
  if (!fs::is_directory(members_dir)) {
    throw InputError(members_dir.string() + " is not a directory");
  }
  for (const auto& entry : fs::directory_iterator(members_dir)) {
    const auto name = entry.path().filename().string();
    if (name.starts_with("member_") && name.ends_with(".json")) {
      manifests.push_back(entry.path());
    }
  }
  std::sort(manifests.begin(), manifests.end());
  if (manifests.empty()) {
    throw InputError("no member_*.json stacks in " + members_dir.string());
  }
  std::vector<core::FieldStack> members;
  for (const auto& m : manifests) members.push_back(core::read_field_stack(m));

  const auto fold = pipeline::verify_ensemble(observed, members, taper,
                                              pipeline::default_case_study_pixels(), seed);
  pipeline::CvReport report;
  report.folds.push_back(fold);

  OutputGuard guard;
  guard.track(report_path);
  if (report_path.has_parent_path()) fs::create_directories(report_path.parent_path());
  pipeline::save_cv_report(report, report_path);
  guard.commit();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Storm-centered stochastic tropical-cyclone precipitation generator"};
  app.require_subcommand(1);

  // synth
  std::string synth_config, synth_out;
  std::uint64_t synth_seed = 0;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic vortex storms");
  synth_cmd->add_option("--config", synth_config, "Vortex configuration JSON")->required();
  synth_cmd->add_option("--seed", synth_seed, "Root random seed");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  // extract-track
  std::string et_u, et_v, et_p, et_ref, et_out;
  trackextract::ExtractConfig et_cfg;
  auto* et_cmd = app.add_subcommand("extract-track",
                                    "Extract per-hour storm predictors from wind/pressure stacks");
  et_cmd->add_option("--u", et_u, "Zonal wind stack manifest")->required();
  et_cmd->add_option("--v", et_v, "Meridional wind stack manifest")->required();
  et_cmd->add_option("--p", et_p, "Surface pressure stack manifest")->required();
  et_cmd->add_option("--ref", et_ref, "Reference-center CSV")->required();
  et_cmd->add_option("--out", et_out, "Output track CSV")->required();
  et_cmd->add_option("--smooth-bandwidth", et_cfg.smooth_bandwidth_cells,
                     "Smoothing kernel bandwidth in grid cells");
  et_cmd->add_option("--window", et_cfg.center_window_deg,
                     "Center search half-window, degrees");
  et_cmd->add_option("--search", et_cfg.rmax_search_km, "rmax search radius, km");

  // fit
  std::string fit_events, fit_out;
  CommonFitFlags fit_flags;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the storm-centered model on training events");
  fit_cmd->add_option("--events", fit_events, "Events manifest JSON")->required();
  fit_cmd->add_option("--out", fit_out, "Model output directory")->required();
  fit_flags.attach(fit_cmd);

  // simulate
  std::string sim_model, sim_track, sim_grid, sim_out;
  int sim_n = 100;
  std::uint64_t sim_seed = 0;
  int sim_threads = 1;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a precipitation ensemble for a track");
  sim_cmd->add_option("--model", sim_model, "Fitted model directory")->required();
  sim_cmd->add_option("--track", sim_track, "Track CSV")->required();
  sim_cmd->add_option("--grid", sim_grid, "Native grid JSON")->required();
  sim_cmd->add_option("--n", sim_n, "Ensemble size");
  sim_cmd->add_option("--seed", sim_seed, "Root random seed");
  sim_cmd->add_option("--threads", sim_threads, "Worker thread cap");
  sim_cmd->add_option("--out", sim_out, "Output directory")->required();

  // cv
  std::string cv_events, cv_report;
  int cv_n = 100;
  CommonFitFlags cv_flags;
  auto* cv_cmd = app.add_subcommand("cv", "Leave-one-storm-out cross-validation");
  cv_cmd->add_option("--events", cv_events, "Events manifest JSON")->required();
  cv_cmd->add_option("--n", cv_n, "Ensemble size per fold");
  cv_cmd->add_option("--report", cv_report, "Report JSON output path")->required();
  cv_flags.attach(cv_cmd);

  // verify
  std::string ver_obs, ver_track, ver_members, ver_report;
  std::uint64_t ver_seed = 0;
  marginal::TaperConfig ver_taper;
  auto* ver_cmd = app.add_subcommand("verify", "Score an ensemble against an observed stack");
  ver_cmd->add_option("--obs", ver_obs, "Observed precipitation stack manifest")->required();
  ver_cmd->add_option("--track", ver_track, "Track CSV for the observed storm")->required();
  ver_cmd->add_option("--members", ver_members, "Directory of member_*.json stacks")->required();
  ver_cmd->add_option("--seed", ver_seed, "Seed for rank tie disaggregation");
  ver_cmd->add_option("--taper-alpha", ver_taper.alpha, "Taper plateau radius in rmax units");
  ver_cmd->add_option("--taper-beta", ver_taper.beta, "Taper cutoff radius in rmax units");
  ver_cmd->add_option("--report", ver_report, "Report JSON output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(synth_config, synth_seed, synth_out);
    if (et_cmd->parsed()) return run_extract_track(et_u, et_v, et_p, et_ref, et_out, et_cfg);
    if (fit_cmd->parsed()) return run_fit(fit_events, fit_out, fit_flags.cfg);
    if (sim_cmd->parsed()) {
      return run_simulate(sim_model, sim_track, sim_grid, sim_n, sim_seed, sim_threads, sim_out);
    }
    if (cv_cmd->parsed()) return run_cv(cv_events, cv_n, cv_report, cv_flags.cfg);
    if (ver_cmd->parsed()) {
      return run_verify(ver_obs, ver_track, ver_members, ver_seed, ver_report, ver_taper);
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
