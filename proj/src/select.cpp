#include "rankspec/select.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>

#include "rankspec/error.hpp"

namespace rankspec {

std::string_view to_string(Criterion c) { return c == Criterion::Aic ? "AIC" : "BIC"; }

namespace {

double log_likelihood_term(double sse, int n) {
  if (n < 1) throw std::invalid_argument("information criterion needs n >= 1");
  if (!(sse >= 0.0) || !std::isfinite(sse)) throw std::invalid_argument("SSE must be finite and non-negative");
  if (sse == 0.0) throw PerfectFitError();
  return n * std::log(sse / n);
}

std::optional<double> score_or_perfect(double (*score)(double, int, int), const ModelFit& f) {
  if (f.sse == 0.0) return std::nullopt;
  return score(f.sse, f.n, f.k);
}

// Perfect fits (nullopt) rank first.
bool score_less(const std::optional<double>& x, const std::optional<double>& y) {
  if (!x) return y.has_value();
  if (!y) return false;
  return *x < *y;
}

}  // namespace

double aic(double sse, int n, int k) { return log_likelihood_term(sse, n) + 2.0 * k; }

double bic(double sse, int n, int k) { return log_likelihood_term(sse, n) + k * std::log(static_cast<double>(n)); }

double delta_aic(const ModelFit& fit2, const ModelFit& fit1) {
  if (fit1.n != fit2.n) throw std::invalid_argument("delta_aic: fits have different n");
  if (fit1.sse == 0.0 || fit2.sse == 0.0) throw PerfectFitError();
  return fit1.n * std::log(fit2.sse / fit1.sse) + 2.0 * (fit2.k - fit1.k);
}

SelectionReport rank_models(std::span<const ModelFit> fits, Criterion criterion) {
  if (fits.size() < 2) throw std::invalid_argument("rank_models needs at least two fits");
  SelectionReport report;
  report.criterion = criterion;
  report.n = fits.front().n;
  for (const auto& f : fits) {
    if (f.n != report.n) throw std::invalid_argument("rank_models: fits have different n");
    report.entries.push_back({f.family(), f.k, f.sse, score_or_perfect(aic, f), score_or_perfect(bic, f), f});
  }

  const auto ordered_by = [](bool use_aic) {
    return [use_aic](const SelectionEntry& x, const SelectionEntry& y) {
      const auto& sx = use_aic ? x.aic : x.bic;
      const auto& sy = use_aic ? y.aic : y.bic;
      if (score_less(sx, sy)) return true;
      if (score_less(sy, sx)) return false;
      return std::tie(x.family, x.sse, x.k) < std::tie(y.family, y.sse, y.k);
    };
  };
  auto entries = report.entries;
  std::stable_sort(entries.begin(), entries.end(), ordered_by(false));
  report.best_by_bic = entries.front().family;
  std::stable_sort(entries.begin(), entries.end(), ordered_by(true));
  report.best_by_aic = entries.front().family;
  if (criterion == Criterion::Bic) std::stable_sort(entries.begin(), entries.end(), ordered_by(false));
  report.entries = std::move(entries);

  const std::size_t m = report.entries.size();
  report.deltas.assign(m, std::vector<std::optional<double>>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const auto& ei = report.entries[i];
      const auto& ej = report.entries[j];
      if (ei.aic && ej.aic) report.deltas[i][j] = *ei.aic - *ej.aic;
    }
  }
  return report;
}

}  // namespace rankspec
