#include "rankspec/resample.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "rankspec/error.hpp"

namespace rankspec {

namespace {

std::int64_t poisson_inversion(double lambda, Rng& rng) {
  const double u = rng.uniform();
  double p = std::exp(-lambda);
  double cdf = p;
  std::int64_t x = 0;
  // The cap only matters when u sits above the rounded cdf's limit.
  const auto cap = static_cast<std::int64_t>(lambda + 40.0 * std::sqrt(lambda) + 40.0);
  while (u > cdf && x < cap) {
    ++x;
    p *= lambda / static_cast<double>(x);
    cdf += p;
  }
  return x;
}

// W. Hormann, "The transformed rejection method for generating Poisson
// random variables" (1993), algorithm PTRS.
std::int64_t poisson_ptrs(double lambda, Rng& rng) {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + lambda + 0.43));
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0 || (us < 0.013 && v > us)) continue;
    const double lhs = std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b);
    const double rhs = -lambda + static_cast<double>(k) * loglam - std::lgamma(static_cast<double>(k) + 1.0);
    if (lhs <= rhs) return k;
  }
}

}  // namespace

std::int64_t poisson_sample(double lambda, Rng& rng) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("Poisson mean must be finite and >= 0");
  if (lambda == 0.0) return 0;
  return lambda < 30.0 ? poisson_inversion(lambda, rng) : poisson_ptrs(lambda, rng);
}

Replicate make_replicate(const RankSpectrum& s, Rng& rng) {
  constexpr int kMaxRedraws = 100000;
  Replicate out{s, 0};
  for (;;) {
    std::vector<SpectrumEntry> drawn;
    drawn.reserve(s.size());
    for (const auto& e : s.entries()) {
      const std::int64_t c = poisson_sample(static_cast<double>(e.count), rng);
      if (c > 0) drawn.push_back({e.label, c});
    }
    if (!drawn.empty()) {
      out.spectrum = RankSpectrum::build(std::move(drawn));
      return out;
    }
    if (++out.redraws >= kMaxRedraws) throw NumericalError("every Poisson replicate draw was empty");
  }
}

std::string_view to_string(ReplicateStatus s) {
  switch (s) {
    case ReplicateStatus::Ok: return "ok";
    case ReplicateStatus::TooFewEntries: return "too_few_entries";
    case ReplicateStatus::BetaNotConverged: return "beta_not_converged";
    case ReplicateStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

ReplicateReport replicate_statistic(const RankSpectrum& replicate, int replicate_index) {
  ReplicateReport rep;
  rep.replicate_index = replicate_index;
  rep.n_effective = static_cast<int>(replicate.size());
  if (rep.n_effective < kMinReplicateSize) {
    rep.status = ReplicateStatus::TooFewEntries;
    return rep;
  }
  const auto y = normalize(replicate);
  try {
    const auto beta = fit_beta_lm(y, beta_init(y));
    if (!beta.converged) {
      rep.status = ReplicateStatus::BetaNotConverged;
      return rep;
    }
    const auto plog = scan_breakpoint(y, /*continuous=*/true, FitOrder::HighFirst);
    rep.sse_beta = beta.fit.sse;
    rep.sse_plog = plog.sse;
    rep.r0 = std::get<PiecewiseLogParams>(plog.params).r0;
  } catch (const NumericalError&) {
    rep.status = ReplicateStatus::NumericalFailure;
    return rep;
  }
  if (!(rep.sse_beta > 0.0) || !(rep.sse_plog > 0.0)) {
    rep.status = ReplicateStatus::NumericalFailure;
    return rep;
  }
  rep.statistic = rep.n_effective * std::log(rep.sse_plog / rep.sse_beta);
  return rep;
}

namespace {

// Type-7 (linear interpolation) sample quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

StatisticHistogram freedman_diaconis_histogram(std::span<const double> values) {
  StatisticHistogram h;
  if (values.empty()) return h;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
  if (!(width > 0.0) || !std::isfinite(width)) width = 1.0;
  h.bin_width = width;
  h.origin = std::floor(sorted.front() / width) * width;
  const auto bins = static_cast<std::size_t>(std::floor((sorted.back() - h.origin) / width)) + 1;
  h.counts.assign(bins, 0);
  for (double v : sorted) {
    const auto i = std::min(bins - 1, static_cast<std::size_t>(std::floor((v - h.origin) / width)));
    ++h.counts[i];
  }
  return h;
}

PValueReport empirical_pvalue(const RankSpectrum& s, int replicates, std::uint64_t seed, int workers) {
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");

  std::vector<ReplicateReport> details(static_cast<std::size_t>(replicates));
  std::vector<int> redraws(static_cast<std::size_t>(replicates), 0);
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  const auto work = [&] {
    try {
      for (int i = next.fetch_add(1); i < replicates; i = next.fetch_add(1)) {
        Rng rng = Rng::child(seed, static_cast<std::uint64_t>(i));
        auto draw = make_replicate(s, rng);
        redraws[static_cast<std::size_t>(i)] = draw.redraws;
        details[static_cast<std::size_t>(i)] = replicate_statistic(draw.spectrum, i);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(replicates);
    }
  };
  const int threads = std::min(workers, replicates);
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);

  PValueReport report;
  report.replicates = replicates;
  report.seed = seed;
  for (double count : s.counts()) report.expected_n_effective += 1.0 - std::exp(-count);

  int positive = 0, above_aic = 0, above_bic = 0;
  double n_sum = 0.0, n_sq = 0.0;
  for (std::size_t i = 0; i < details.size(); ++i) {
    const auto& d = details[i];
    report.redraws += redraws[i];
    n_sum += d.n_effective;
    n_sq += static_cast<double>(d.n_effective) * d.n_effective;
    if (!d.valid()) {
      ++report.flagged;
      continue;
    }
    report.statistics.push_back(d.statistic);
    positive += d.statistic > 0.0;
    above_aic += d.statistic > -2.0;
    above_bic += d.statistic > -std::log(static_cast<double>(d.n_effective));
  }
  report.valid = static_cast<int>(report.statistics.size());
  if (report.valid == 0) throw NumericalError("no replicate produced a valid statistic");
  const double m = report.valid;
  report.p_value = positive / m;
  report.frac_above_aic_margin = above_aic / m;
  report.frac_above_bic_margin = above_bic / m;
  report.mean_n_effective = n_sum / replicates;
  report.sd_n_effective =
      replicates > 1 ? std::sqrt(std::max(0.0, (n_sq - n_sum * n_sum / replicates) / (replicates - 1.0))) : 0.0;
  report.histogram = freedman_diaconis_histogram(report.statistics);
  report.details = std::move(details);
  return report;
}

}  // namespace rankspec
