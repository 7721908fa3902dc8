#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rankspec/fit.hpp"

namespace rankspec {

enum class Criterion { Aic, Bic };

std::string_view to_string(Criterion c);

/// n ln(sse / n) + 2k. Throws PerfectFitError when sse == 0.
double aic(double sse, int n, int k);
/// n ln(sse / n) + k ln n.
double bic(double sse, int n, int k);

/// AIC(fit2) - AIC(fit1) = n ln(SSE2 / SSE1) + 2 (K2 - K1).
double delta_aic(const ModelFit& fit2, const ModelFit& fit1);

struct SelectionEntry {
  ModelFamily family = ModelFamily::Log;
  int k = 0;
  double sse = 0.0;
  // nullopt marks a perfect fit (criterion is -inf).
  std::optional<double> aic;
  std::optional<double> bic;
  ModelFit fit;

  bool perfect_fit() const noexcept { return !aic.has_value(); }
};

struct SelectionReport {
  Criterion criterion = Criterion::Aic;
  int n = 0;
  std::vector<SelectionEntry> entries;  // ascending by the chosen criterion
  ModelFamily best_by_aic = ModelFamily::Log;
  ModelFamily best_by_bic = ModelFamily::Log;
  // deltas[i][j] = AIC(entries[i]) - AIC(entries[j]); nullopt when either is a perfect fit.
  std::vector<std::vector<std::optional<double>>> deltas;
};

SelectionReport rank_models(std::span<const ModelFit> fits, Criterion criterion = Criterion::Aic);

}  // namespace rankspec
