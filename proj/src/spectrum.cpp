#include "rankspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "rankspec/error.hpp"

namespace rankspec {

RankSpectrum RankSpectrum::build(std::vector<SpectrumEntry> pairs) {
  if (pairs.empty()) {
    throw InputError("spectrum needs at least one entry");
  }
  std::unordered_set<std::string> seen;
  seen.reserve(pairs.size());
  std::int64_t total = 0;
  for (const auto& e : pairs) {
    if (e.count <= 0) {
      throw InputError("non-positive count " + std::to_string(e.count) + " for label '" + e.label + "'");
    }
    if (!seen.insert(e.label).second) {
      throw InputError("duplicate label '" + e.label + "'");
    }
    total += e.count;
  }
  std::sort(pairs.begin(), pairs.end(), [](const SpectrumEntry& x, const SpectrumEntry& y) {
    if (x.count != y.count) return x.count > y.count;
    return x.label < y.label;
  });
  RankSpectrum s;
  s.entries_ = std::move(pairs);
  s.total_ = total;
  return s;
}

std::int64_t RankSpectrum::count_at(std::size_t rank) const {
  if (rank < 1 || rank > entries_.size()) {
    throw std::out_of_range("rank " + std::to_string(rank) + " outside 1.." + std::to_string(entries_.size()));
  }
  return entries_[rank - 1].count;
}

std::vector<std::int64_t> RankSpectrum::counts() const {
  std::vector<std::int64_t> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.count);
  return out;
}

NormalizedSpectrum NormalizedSpectrum::from_values(std::vector<double> values) {
  if (values.empty()) {
    throw std::invalid_argument("normalized spectrum must be non-empty");
  }
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("normalized spectrum has a non-finite value");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("normalized spectrum sums to " + std::to_string(sum) + ", not 1");
  }
  NormalizedSpectrum y;
  y.values_ = std::move(values);
  return y;
}

RankSpectrum build_spectrum(std::vector<SpectrumEntry> pairs) { return RankSpectrum::build(std::move(pairs)); }

NormalizedSpectrum normalize(const RankSpectrum& s) {
  NormalizedSpectrum y;
  const double total = static_cast<double>(s.total());
  y.values_.reserve(s.size());
  for (const auto& e : s.entries()) y.values_.push_back(static_cast<double>(e.count) / total);
  return y;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

double fraction_within(std::span<const std::int64_t> counts, double lo, double hi) {
  const auto inside = std::count_if(counts.begin(), counts.end(), [&](std::int64_t c) {
    const double x = static_cast<double>(c);
    return x >= lo && x <= hi;
  });
  return static_cast<double>(inside) / static_cast<double>(counts.size());
}

std::vector<double> ascending_values(const RankSpectrum& s) {
  std::vector<double> x;
  x.reserve(s.size());
  for (auto it = s.entries().rbegin(); it != s.entries().rend(); ++it) x.push_back(static_cast<double>(it->count));
  return x;
}

}  // namespace

SpectrumStats descriptive_stats(const RankSpectrum& s) {
  const auto counts = s.counts();
  const auto n = static_cast<double>(counts.size());
  SpectrumStats st;
  st.total_characters = s.total();
  st.n_syllables = static_cast<std::int64_t>(counts.size());
  st.mean = static_cast<double>(s.total()) / n;

  double ss = 0.0;
  for (auto c : counts) ss += (static_cast<double>(c) - st.mean) * (static_cast<double>(c) - st.mean);
  st.sd = counts.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

  std::vector<double> values(counts.begin(), counts.end());
  st.median = median_of(values);
  for (auto& v : values) v = std::abs(v - st.median);
  st.mad = median_of(std::move(values));

  st.coverage_mean_sd = fraction_within(counts, std::max(0.0, st.mean - st.sd), st.mean + st.sd);
  st.coverage_median_mad = fraction_within(counts, st.median - st.mad, st.median + st.mad);
  st.singleton_count = std::count(counts.begin(), counts.end(), std::int64_t{1});
  return st;
}

std::size_t top_share_items(const RankSpectrum& s, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("top_share fraction must lie in (0, 1]");
  }
  const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(s.size()) * fraction));
  return std::clamp<std::size_t>(k, 1, s.size());
}

double top_share(const RankSpectrum& s, double fraction) {
  const std::size_t k = top_share_items(s, fraction);
  std::int64_t top = 0;
  for (std::size_t i = 0; i < k; ++i) top += s.entries()[i].count;
  return static_cast<double>(top) / static_cast<double>(s.total());
}

double gini(const RankSpectrum& s) {
  const auto x = ascending_values(s);
  const auto n = static_cast<double>(x.size());
  double weighted = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = static_cast<double>(i + 1);
    weighted += (n + 1.0 - r) * x[i];
    sum += x[i];
  }
  return (n + 1.0 - 2.0 * weighted / sum) / n;
}

LorenzCurve lorenz_curve(const RankSpectrum& s) {
  const auto x = ascending_values(s);
  const auto n = static_cast<double>(x.size());
  const auto total = static_cast<double>(s.total());
  LorenzCurve curve;
  curve.points.reserve(x.size() + 1);
  curve.points.push_back({0.0, 0.0});
  double cum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cum += x[i];
    curve.points.push_back({static_cast<double>(i + 1) / n, cum / total});
  }
  curve.points.back() = {1.0, 1.0};
  return curve;
}

double lorenz_gini(const LorenzCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i - 1];
    const auto& q = curve.points[i];
    area += 0.5 * (q.item_share - p.item_share) * (q.mass_share + p.mass_share);
  }
  return 1.0 - 2.0 * area;
}

std::vector<CountBin> histogram(const RankSpectrum& s, std::int64_t bin_width) {
  if (bin_width < 1) throw std::invalid_argument("bin width must be >= 1");
  const std::int64_t max_count = s.entries().front().count;
  const std::int64_t bins = (max_count - 1) / bin_width + 1;
  std::vector<CountBin> out(static_cast<std::size_t>(bins));
  for (std::int64_t k = 0; k < bins; ++k) out[static_cast<std::size_t>(k)].bin_start = k * bin_width + 1;
  for (const auto& e : s.entries()) ++out[static_cast<std::size_t>((e.count - 1) / bin_width)].items;
  return out;
}

}  // namespace rankspec
