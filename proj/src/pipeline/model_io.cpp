#include <fstream>

#include <json.hpp>

#include "tcgen/core/io.hpp"
#include "tcgen/pipeline/pipeline.hpp"

namespace tcgen::pipeline {

using nlohmann::json;

namespace {

json grid_to_json(const core::PolarGridSpec& g) {
  return {{"n_r", g.n_r}, {"n_theta", g.n_theta}, {"r_max_km", g.r_max_km}};
}

core::PolarGridSpec grid_from_json(const json& j) {
  core::PolarGridSpec g;
  g.n_r = j.at("n_r").get<int>();
  g.n_theta = j.at("n_theta").get<int>();
  g.r_max_km = j.at("r_max_km").get<double>();
  return g;
}

json cfg_to_json(const FitConfig& c) {
  return {{"n_eofs", c.n_eofs},
          {"center_eofs", c.center_eofs},
          {"n_harmonics", c.n_harmonics},
          {"krige",
           {{"range_scaled", c.krige.range_scaled},
            {"nugget_rel", c.krige.nugget_rel},
            {"n_neighbors", c.krige.n_neighbors}}},
          {"forest",
           {{"n_trees", c.forest.n_trees},
            {"mtry", c.forest.mtry},
            {"min_node", c.forest.min_node},
            {"bootstrap", c.forest.bootstrap}}},
          {"taper", {{"alpha", c.taper.alpha}, {"beta", c.taper.beta}}},
          {"ensemble_size", c.ensemble_size},
          {"seed", c.seed},
          {"threads", c.threads}};
}

FitConfig cfg_from_json(const json& j) {
  FitConfig c;
  c.n_eofs = j.at("n_eofs").get<int>();
  c.center_eofs = j.at("center_eofs").get<bool>();
  c.n_harmonics = j.at("n_harmonics").get<int>();
  const json& k = j.at("krige");
  c.krige.range_scaled = k.at("range_scaled").get<double>();
  c.krige.nugget_rel = k.at("nugget_rel").get<double>();
  c.krige.n_neighbors = k.at("n_neighbors").get<int>();
  const json& f = j.at("forest");
  c.forest.n_trees = f.at("n_trees").get<int>();
  c.forest.mtry = f.at("mtry").get<int>();
  c.forest.min_node = f.at("min_node").get<int>();
  c.forest.bootstrap = f.at("bootstrap").get<bool>();
  const json& t = j.at("taper");
  c.taper.alpha = t.at("alpha").get<double>();
  c.taper.beta = t.at("beta").get<double>();
  c.ensemble_size = j.at("ensemble_size").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.threads = j.at("threads").get<int>();
  return c;
}

std::vector<double> matrix_to_flat(const Eigen::MatrixXd& m) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()) * m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out[static_cast<std::size_t>(r) * m.cols() + c] = m(r, c);
    }
  }
  return out;
}

Eigen::MatrixXd matrix_from_flat(const std::vector<double>& flat, int n, std::size_t offset) {
  Eigen::MatrixXd m(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      m(r, c) = flat[offset + static_cast<std::size_t>(r) * n + c];
    }
  }
  return m;
}

// Flat tree encoding: 6 doubles per node, preorder of the node vector.
constexpr int kNodeDoubles = 6;

void append_forest(const rforest::Forest& forest, std::vector<double>& blob,
                   json& tree_sizes) {
  for (const rforest::Tree& tree : forest.trees) {
    tree_sizes.push_back(static_cast<std::int64_t>(tree.nodes.size()));
    for (const rforest::TreeNode& n : tree.nodes) {
      blob.push_back(static_cast<double>(n.feature));
      blob.push_back(n.threshold);
      blob.push_back(static_cast<double>(n.left));
      blob.push_back(static_cast<double>(n.right));
      blob.push_back(n.value);
      blob.push_back(n.var_reduction);
    }
  }
}

rforest::Forest forest_from_blob(const std::vector<double>& blob, const json& meta,
                                 const FitConfig& cfg, std::uint64_t seed) {
  rforest::Forest forest;
  forest.cfg = cfg.forest;
  forest.cfg.seed = seed;
  forest.n_features = meta.at("n_features").get<int>();
  forest.y_min = meta.at("y_min").get<double>();
  forest.y_max = meta.at("y_max").get<double>();
  std::size_t off = 0;
  for (const auto& sz : meta.at("tree_sizes")) {
    rforest::Tree tree;
    tree.nodes.resize(sz.get<std::size_t>());
    for (auto& n : tree.nodes) {
      n.feature = static_cast<int>(blob[off++]);
      n.threshold = blob[off++];
      n.left = static_cast<int>(blob[off++]);
      n.right = static_cast<int>(blob[off++]);
      n.value = blob[off++];
      n.var_reduction = blob[off++];
    }
    forest.trees.push_back(std::move(tree));
  }
  if (off != blob.size()) throw FormatError("model: forest blob size mismatch");
  return forest;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return j;
}

void dump_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw InputError("write failed: " + path.string());
}

}  // namespace

void save_model(const FittedModel& model, const std::filesystem::path& dir) {
  model.validate();
  std::filesystem::create_directories(dir);

  json j;
  j["format_version"] = 1;
  j["polar"] = grid_to_json(model.polar);
  j["cfg"] = cfg_to_json(model.cfg);
  j["event_ids"] = model.event_ids;

  j["eof"] = {{"L", model.basis.L},
              {"K", model.basis.K},
              {"singular_values", model.basis.singular_values},
              {"total_variance", model.basis.total_variance}};
  core::write_f64_blob(dir / "eof_patterns.f64", model.basis.patterns);
  core::write_f64_blob(dir / "mean_field.f64", model.mean_field);

  json forests = json::array();
  for (int l = 0; l < model.basis.L; ++l) {
    const rforest::Forest& f = model.forests[static_cast<std::size_t>(l)];
    json tree_sizes = json::array();
    std::vector<double> blob;
    append_forest(f, blob, tree_sizes);
    core::write_f64_blob(dir / ("forest_" + std::to_string(l) + ".f64"), blob);
    forests.push_back({{"n_features", f.n_features},
                       {"y_min", f.y_min},
                       {"y_max", f.y_max},
                       {"seed", f.cfg.seed},
                       {"tree_sizes", tree_sizes}});
  }
  j["forests"] = forests;

  json pc_ar = json::array();
  for (const auto& p : model.pc_ar) pc_ar.push_back({{"phi", p.phi}, {"sigma2", p.sigma2}});
  j["pc_ar"] = pc_ar;

  const circular::ResidualModel& rm = model.residual;
  j["residual"] = {{"M", rm.M},
                   {"n_r", rm.n_r},
                   {"phi_bar", rm.phi_bar},
                   {"jitter_used", rm.jitter_used}};
  core::write_f64_blob(dir / "cov0.f64", matrix_to_flat(rm.cov0));
  std::vector<double> cov1_blob, cov2_blob;
  for (int m = 0; m < rm.M; ++m) {
    const auto f1 = matrix_to_flat(rm.cov1[static_cast<std::size_t>(m)]);
    const auto f2 = matrix_to_flat(rm.cov2[static_cast<std::size_t>(m)]);
    cov1_blob.insert(cov1_blob.end(), f1.begin(), f1.end());
    cov2_blob.insert(cov2_blob.end(), f2.begin(), f2.end());
  }
  core::write_f64_blob(dir / "cov1.f64", cov1_blob);
  core::write_f64_blob(dir / "cov2.f64", cov2_blob);

  j["gamma"] = {{"shape", model.gamma.shape}, {"rate", model.gamma.rate}};

  dump_json(j, dir / "model.json");
}

FittedModel load_model(const std::filesystem::path& dir) {
  const json j = load_json(dir / "model.json");
  if (j.at("format_version").get<int>() != 1) {
    throw FormatError("model: unsupported format_version");
  }

  FittedModel model;
  model.polar = grid_from_json(j.at("polar"));
  model.cfg = cfg_from_json(j.at("cfg"));
  model.event_ids = j.at("event_ids").get<std::vector<std::string>>();

  const json& je = j.at("eof");
  model.basis.spec = model.polar;
  model.basis.L = je.at("L").get<int>();
  model.basis.K = je.at("K").get<int>();
  model.basis.singular_values = je.at("singular_values").get<std::vector<double>>();
  model.basis.total_variance = je.at("total_variance").get<double>();
  model.basis.patterns = core::read_f64_blob(
      dir / "eof_patterns.f64",
      static_cast<std::size_t>(model.basis.L) * model.basis.K);
  model.mean_field =
      core::read_f64_blob(dir / "mean_field.f64", static_cast<std::size_t>(model.basis.K));

  const json& jf = j.at("forests");
  if (static_cast<int>(jf.size()) != model.basis.L) {
    throw FormatError("model: forest count mismatch");
  }
  for (int l = 0; l < model.basis.L; ++l) {
    const json& meta = jf[static_cast<std::size_t>(l)];
    std::size_t n_nodes = 0;
    for (const auto& sz : meta.at("tree_sizes")) n_nodes += sz.get<std::size_t>();
    const auto blob = core::read_f64_blob(dir / ("forest_" + std::to_string(l) + ".f64"),
                                          n_nodes * kNodeDoubles);
    model.forests.push_back(
        forest_from_blob(blob, meta, model.cfg, meta.at("seed").get<std::uint64_t>()));
  }

  for (const auto& p : j.at("pc_ar")) {
    model.pc_ar.push_back({p.at("phi").get<double>(), p.at("sigma2").get<double>()});
  }

  const json& jr = j.at("residual");
  circular::ResidualModel& rm = model.residual;
  rm.M = jr.at("M").get<int>();
  rm.n_r = jr.at("n_r").get<int>();
  rm.phi_bar = jr.at("phi_bar").get<double>();
  rm.jitter_used = jr.at("jitter_used").get<double>();
  const std::size_t nn = static_cast<std::size_t>(rm.n_r) * rm.n_r;
  rm.cov0 = matrix_from_flat(core::read_f64_blob(dir / "cov0.f64", nn), rm.n_r, 0);
  const auto cov1_blob = core::read_f64_blob(dir / "cov1.f64", nn * rm.M);
  const auto cov2_blob = core::read_f64_blob(dir / "cov2.f64", nn * rm.M);
  for (int m = 0; m < rm.M; ++m) {
    rm.cov1.push_back(matrix_from_flat(cov1_blob, rm.n_r, nn * m));
    rm.cov2.push_back(matrix_from_flat(cov2_blob, rm.n_r, nn * m));
  }

  model.gamma.shape = j.at("gamma").at("shape").get<double>();
  model.gamma.rate = j.at("gamma").at("rate").get<double>();

  model.validate();
  return model;
}

void save_cv_report(const CvReport& report, const std::filesystem::path& path) {
  json folds = json::array();
  for (const CvFoldReport& f : report.folds) {
    json qq = json::array();
    for (const auto& px : f.qq) {
      qq.push_back({{"lon", px.lon},
                    {"lat", px.lat},
                    {"probs", px.probs},
                    {"obs_quantiles", px.obs_q},
                    {"envelope_lo", px.env_lo},
                    {"envelope_hi", px.env_hi}});
    }
    folds.push_back({{"event_id", f.event_id},
                     {"brier_mean", f.brier_mean},
                     {"brier_histogram", f.brier_histogram},
                     {"rank_histogram", f.rank_histogram},
                     {"qq", qq},
                     {"integrated_obs", f.integrated_obs},
                     {"integrated_q05", f.integrated_q05},
                     {"integrated_q25", f.integrated_q25},
                     {"integrated_q50", f.integrated_q50},
                     {"integrated_q75", f.integrated_q75},
                     {"integrated_q95", f.integrated_q95},
                     {"integrated_map_q05", f.integrated_map_q05},
                     {"integrated_map_q95", f.integrated_map_q95}});
  }
  dump_json(json{{"format_version", 1}, {"folds", folds}}, path);
}

std::vector<Event> load_events_manifest(const std::filesystem::path& path) {
  const json j = load_json(path);
  if (!j.contains("events") || !j.at("events").is_array()) {
    throw FormatError(path.string() + ": missing \"events\" array");
  }
  const auto base = path.parent_path();
  std::vector<Event> events;
  for (const auto& je : j.at("events")) {
    Event ev;
    ev.id = je.at("id").get<std::string>();
    ev.precip = core::read_field_stack(base / je.at("stack").get<std::string>());
    ev.track = core::read_track(base / je.at("track").get<std::string>());
    events.push_back(std::move(ev));
  }
  if (events.empty()) throw InputError(path.string() + ": no events listed");
  return events;
}

}  // namespace tcgen::pipeline
