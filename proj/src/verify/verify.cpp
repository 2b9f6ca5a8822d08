#include "tcgen/verify/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tcgen/common.hpp"
#include "tcgen/mathfn.hpp"

namespace tcgen::verify {

double brier(std::span<const double> prob, std::span<const double> obs) {
  if (prob.size() != obs.size()) throw InputError("brier: length mismatch");
  if (prob.empty()) throw InputError("brier: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    if (!(prob[i] >= 0.0 && prob[i] <= 1.0)) {
      throw InputError("brier: probability outside [0, 1] at index " + std::to_string(i));
    }
    const double d = obs[i] - prob[i];
    acc += d * d;
  }
  return acc / static_cast<double>(prob.size());
}

void RankHistogram::add(double obs, std::span<const double> members, Rng& rng) {
  if (members.size() + 1 != counts_.size()) {
    throw InputError("RankHistogram: ensemble size mismatch");
  }
  std::size_t below = 0, ties = 0;
  for (double m : members) {
    if (m < obs) ++below;
    else if (m == obs) ++ties;
  }
  // Random disaggregation places the observation uniformly within its tie group.
  const std::size_t rank = below + (ties > 0 ? rng.uniform_int(ties + 1) : 0);
  ++counts_[rank];
}

std::int64_t RankHistogram::total() const {
  std::int64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

double RankHistogram::uniformity_pvalue() const {
  const std::int64_t n = total();
  if (n == 0) throw InputError("RankHistogram: no observations added");
  const double expected = static_cast<double>(n) / static_cast<double>(counts_.size());
  double chi2 = 0.0;
  for (auto c : counts_) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  return mathfn::chi2_sf(chi2, static_cast<double>(counts_.size()) - 1.0);
}

double empirical_quantile(std::vector<double> v, double p) {
  if (v.empty()) throw InputError("empirical_quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double h = p * (static_cast<double>(v.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(std::clamp(
      std::floor(h), 0.0, static_cast<double>(v.size()) - 1.0));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double w = h - static_cast<double>(lo);
  return (1.0 - w) * v[lo] + w * v[hi];
}

QqResult qq_pairs(const std::vector<std::vector<double>>& ensemble_series,
                  std::span<const double> obs_series) {
  if (obs_series.empty()) throw InputError("qq_pairs: empty observed series");
  if (ensemble_series.empty()) throw InputError("qq_pairs: no ensemble series");
  const std::size_t n = obs_series.size();

  QqResult res;
  res.probs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    res.probs[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  }
  std::vector<double> obs(obs_series.begin(), obs_series.end());
  res.obs_quantiles.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    res.obs_quantiles[i] = empirical_quantile(obs, res.probs[i]);
  }
  res.envelope_lo.assign(n, std::numeric_limits<double>::infinity());
  res.envelope_hi.assign(n, -std::numeric_limits<double>::infinity());
  for (const auto& member : ensemble_series) {
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) {
      q[i] = empirical_quantile(member, res.probs[i]);
      res.envelope_lo[i] = std::min(res.envelope_lo[i], q[i]);
      res.envelope_hi[i] = std::max(res.envelope_hi[i], q[i]);
    }
    res.member_quantiles.push_back(std::move(q));
  }
  return res;
}

std::vector<double> integrated_series(const core::FieldStack& stack) {
  std::vector<double> out(static_cast<std::size_t>(stack.n_t()), 0.0);
  const std::size_t cells = static_cast<std::size_t>(stack.grid.n_cells());
  for (int t = 0; t < stack.n_t(); ++t) {
    const double* s = stack.slice(t);
    double acc = 0.0;
    for (std::size_t i = 0; i < cells; ++i) acc += s[i];
    out[static_cast<std::size_t>(t)] = acc;
  }
  return out;
}

EnsembleBand ensemble_band(const std::vector<core::FieldStack>& stacks) {
  if (stacks.empty()) throw InputError("ensemble_band: no members");
  const int T = stacks.front().n_t();
  std::vector<std::vector<double>> totals;
  for (const auto& s : stacks) {
    if (s.n_t() != T || !(s.grid == stacks.front().grid)) {
      throw InputError("ensemble_band: misaligned member stacks");
    }
    totals.push_back(integrated_series(s));
  }
  EnsembleBand band;
  for (int t = 0; t < T; ++t) {
    std::vector<double> v(stacks.size());
    for (std::size_t e = 0; e < stacks.size(); ++e) v[e] = totals[e][t];
    band.q05.push_back(empirical_quantile(v, 0.05));
    band.q25.push_back(empirical_quantile(v, 0.25));
    band.q50.push_back(empirical_quantile(v, 0.50));
    band.q75.push_back(empirical_quantile(v, 0.75));
    band.q95.push_back(empirical_quantile(v, 0.95));
  }
  return band;
}

std::vector<double> integrated_map(const core::FieldStack& stack) {
  const std::size_t cells = static_cast<std::size_t>(stack.grid.n_cells());
  std::vector<double> out(cells, 0.0);
  for (int t = 0; t < stack.n_t(); ++t) {
    const double* s = stack.slice(t);
    for (std::size_t i = 0; i < cells; ++i) out[i] += s[i];
  }
  return out;
}

MapBand integrated_map_band(const std::vector<core::FieldStack>& stacks) {
  if (stacks.empty()) throw InputError("integrated_map_band: no members");
  const std::size_t cells = static_cast<std::size_t>(stacks.front().grid.n_cells());
  std::vector<std::vector<double>> maps;
  for (const auto& s : stacks) maps.push_back(integrated_map(s));
  MapBand band;
  band.q05.resize(cells);
  band.q95.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    std::vector<double> v(stacks.size());
    for (std::size_t e = 0; e < stacks.size(); ++e) v[e] = maps[e][i];
    band.q05[i] = empirical_quantile(v, 0.05);
    band.q95[i] = empirical_quantile(v, 0.95);
  }
  return band;
}

}  // namespace tcgen::verify
