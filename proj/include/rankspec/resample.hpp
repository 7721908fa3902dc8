#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rankspec/fit.hpp"
#include "rankspec/rng.hpp"
#include "rankspec/spectrum.hpp"

namespace rankspec {

/// One Pois(lambda) draw: sequential inversion below lambda = 30, Hormann's
/// PTRS transformed rejection above.
std::int64_t poisson_sample(double lambda, Rng& rng);

struct Replicate {
  RankSpectrum spectrum;
  int redraws = 0;  // all-zero draws that were discarded
};

/// Replaces every count by a Pois(count) draw, drops zeros and re-ranks.
Replicate make_replicate(const RankSpectrum& s, Rng& rng);

enum class ReplicateStatus { Ok, TooFewEntries, BetaNotConverged, NumericalFailure };

std::string_view to_string(ReplicateStatus s);

struct ReplicateReport {
  int replicate_index = 0;
  int n_effective = 0;
  double sse_beta = 0.0;
  double sse_plog = 0.0;
  double statistic = 0.0;  // n_effective * ln(sse_plog / sse_beta)
  int r0 = 0;
  ReplicateStatus status = ReplicateStatus::Ok;

  bool valid() const noexcept { return status == ReplicateStatus::Ok; }
};

/// Smallest replicate size replicate_statistic accepts.
inline constexpr int kMinReplicateSize = 10;

/// Beta (linearized start, then LM) against the continuous, high-ranks-first
/// piecewise-log fit with r0 scanned over [2, floor(n / 5)].
ReplicateReport replicate_statistic(const RankSpectrum& replicate, int replicate_index = 0);

struct StatisticHistogram {
  double origin = 0.0;
  double bin_width = 1.0;
  std::vector<std::int64_t> counts;  // bin i covers [origin + i w, origin + (i+1) w)
};

/// Freedman-Diaconis bin width 2 IQR m^(-1/3); width 1 when that degenerates.
StatisticHistogram freedman_diaconis_histogram(std::span<const double> values);

struct PValueReport {
  int replicates = 0;
  int valid = 0;
  int flagged = 0;
  int redraws = 0;
  std::uint64_t seed = 0;
  double p_value = 0.0;                // fraction of valid statistics > 0
  double frac_above_aic_margin = 0.0;  // statistic > -2
  double frac_above_bic_margin = 0.0;  // statistic > -ln(n_effective)
  double mean_n_effective = 0.0;
  double sd_n_effective = 0.0;
  double expected_n_effective = 0.0;  // sum_r (1 - exp(-count_r))
  std::vector<double> statistics;     // valid statistics in replicate order
  std::vector<ReplicateReport> details;
  StatisticHistogram histogram;
};

/// Replicate i draws from Rng::child(seed, i); the report is identical for
/// every worker count.
PValueReport empirical_pvalue(const RankSpectrum& s, int replicates, std::uint64_t seed, int workers = 1);

}  // namespace rankspec
