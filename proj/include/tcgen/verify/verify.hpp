#pragma once

#include <span>
#include <vector>

#include "tcgen/core/types.hpp"
#include "tcgen/rng.hpp"

namespace tcgen::verify {

/// Mean squared difference between forecast probabilities and binary outcomes.
double brier(std::span<const double> prob, std::span<const double> obs);

/// Verification rank histogram accumulator over (cell, hour) pairs.
/// Ties between the observation and ensemble members are randomly
/// disaggregated with the supplied stream.
class RankHistogram {
 public:
  explicit RankHistogram(int ensemble_size)
      : counts_(static_cast<std::size_t>(ensemble_size) + 1, 0) {}

  void add(double obs, std::span<const double> members, Rng& rng);

  const std::vector<std::int64_t>& counts() const { return counts_; }
  std::int64_t total() const;

  /// Chi-square goodness-of-fit p-value against the uniform distribution.
  double uniformity_pvalue() const;

 private:
  std::vector<std::int64_t> counts_;
};

/// Matched empirical quantiles of ensemble series against an observed series.
struct QqResult {
  std::vector<double> probs;                   // (i - 0.5) / n_obs
  std::vector<double> obs_quantiles;
  std::vector<std::vector<double>> member_quantiles;  // one curve per member
  std::vector<double> envelope_lo;             // per-probability member min
  std::vector<double> envelope_hi;             // per-probability member max
};

QqResult qq_pairs(const std::vector<std::vector<double>>& ensemble_series,
                  std::span<const double> obs_series);

/// Per-hour domain totals (sum over cells).
std::vector<double> integrated_series(const core::FieldStack& stack);

/// Pointwise ensemble quantiles of per-hour domain totals.
struct EnsembleBand {
  std::vector<double> q05, q25, q50, q75, q95;  // per hour
};
EnsembleBand ensemble_band(const std::vector<core::FieldStack>& stacks);

/// Per-cell time-integrated precipitation map.
std::vector<double> integrated_map(const core::FieldStack& stack);

/// Pointwise 5%/95% ensemble quantiles of the time-integrated maps.
struct MapBand {
  std::vector<double> q05, q95;  // per cell
};
MapBand integrated_map_band(const std::vector<core::FieldStack>& stacks);

/// Empirical quantile with linear interpolation between order statistics.
double empirical_quantile(std::vector<double> sorted_or_not, double p);

}  // namespace tcgen::verify
