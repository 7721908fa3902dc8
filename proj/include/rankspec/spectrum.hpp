#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rankspec {

struct SpectrumEntry {
  std::string label;
  std::int64_t count = 0;

  bool operator==(const SpectrumEntry&) const = default;
};

/// Ranked positive counts with labels. Rank 1 is the largest count; ties are
/// ordered by label (byte order). Immutable once built.
class RankSpectrum {
 public:
  /// Sorts and validates. Throws InputError on empty input, a count <= 0 or a
  /// duplicate label.
  static RankSpectrum build(std::vector<SpectrumEntry> pairs);

  std::span<const SpectrumEntry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  /// 1-based rank.
  std::int64_t count_at(std::size_t rank) const;
  std::vector<std::int64_t> counts() const;
  std::int64_t total() const noexcept { return total_; }

  bool operator==(const RankSpectrum&) const = default;

 private:
  RankSpectrum() = default;
  std::vector<SpectrumEntry> entries_;
  std::int64_t total_ = 0;
};

/// Probability mass per rank, y_r = n_c(r) / sum n_c.
class NormalizedSpectrum {
 public:
  /// Wraps model-generated values. Requires finite values summing to 1
  /// within 1e-9; positivity is only guaranteed when built by normalize().
  static NormalizedSpectrum from_values(std::vector<double> values);

  std::span<const double> values() const& noexcept { return values_; }
  std::span<const double> values() const&& = delete;  // would dangle
  std::size_t source_n() const noexcept { return values_.size(); }
  /// 1-based rank.
  double at(std::size_t rank) const { return values_.at(rank - 1); }

 private:
  friend NormalizedSpectrum normalize(const RankSpectrum& s);
  std::vector<double> values_;
};

struct SpectrumStats {
  std::int64_t total_characters = 0;
  std::int64_t n_syllables = 0;
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;
  double mad = 0.0;
  double coverage_mean_sd = 0.0;
  double coverage_median_mad = 0.0;
  std::int64_t singleton_count = 0;
};

struct LorenzPoint {
  double item_share = 0.0;
  double mass_share = 0.0;
};

struct LorenzCurve {
  std::vector<LorenzPoint> points;
};

struct CountBin {
  std::int64_t bin_start = 0;
  std::int64_t items = 0;

  bool operator==(const CountBin&) const = default;
};

RankSpectrum build_spectrum(std::vector<SpectrumEntry> pairs);
NormalizedSpectrum normalize(const RankSpectrum& s);
SpectrumStats descriptive_stats(const RankSpectrum& s);

/// Share of total mass held by the top round(n * fraction) entries (at least one).
double top_share(const RankSpectrum& s, double fraction);
/// Number of entries top_share() counts for this fraction.
std::size_t top_share_items(const RankSpectrum& s, double fraction);

// G = (n + 1 - 2 * sum_r (n+1-r) x_r / sum x) / n over x sorted ascending.
double gini(const RankSpectrum& s);

/// Items accumulated from the smallest count upward; n + 1 points from (0,0) to (1,1).
LorenzCurve lorenz_curve(const RankSpectrum& s);
/// Twice the area between the diagonal and the curve (trapezoid rule, exact for
/// a piecewise-linear curve).
double lorenz_gini(const LorenzCurve& curve);

/// Bins [k*w + 1, (k+1)*w] for k = 0 .. the bin holding the largest count.
/// Empty bins are kept so the layout is dense.
std::vector<CountBin> histogram(const RankSpectrum& s, std::int64_t bin_width);

/// Median of a sample; midpoint of the central pair for even sizes.
double median_of(std::vector<double> values);

}  // namespace rankspec
