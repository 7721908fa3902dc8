#pragma once

#include <optional>
#include <string_view>
#include <variant>

#include "rankspec/spectrum.hpp"

namespace rankspec {

// Enumeration order is the tie-break order used by model ranking.
enum class ModelFamily { Log, PiecewiseLog, Beta };

enum class FitOrder { HighFirst, LowFirst };

std::string_view to_string(ModelFamily f);
std::string_view to_string(FitOrder o);

/// f(r) = c + a ln r, with c fixed by sum_r f(r) = 1.
struct LogParams {
  double c = 0.0;
  double a = 0.0;
};

/// c + a ln r for r <= r0, c_prime + a_prime ln r above.
struct PiecewiseLogParams {
  double c = 0.0;
  double a = 0.0;
  double c_prime = 0.0;
  double a_prime = 0.0;
  int r0 = 2;
  bool continuous = false;
  FitOrder fit_order = FitOrder::HighFirst;
  double converge_point = 2.0;
};

/// f(r) = c (n + 1 - r)^b / r^a.
struct BetaParams {
  double c = 1.0;
  double a = 0.0;
  double b = 0.0;
};

using ModelParams = std::variant<LogParams, PiecewiseLogParams, BetaParams>;

struct ModelFit {
  ModelParams params;
  double sse = 0.0;
  int k = 0;  // parameter count charged by information criteria
  int n = 0;

  ModelFamily family() const noexcept { return static_cast<ModelFamily>(params.index()); }
};

/// Parameter count per family: LOG 2, BETA 3, piecewise 4 (3 when continuous).
int parameter_count(const ModelParams& params);

/// Wraps parameters as a fit over ranks 1..n with sse left at 0.
ModelFit make_model(ModelParams params, int n);

double eval_model(const ModelFit& fit, int rank);

/// sum_r (f(r) - y_r)^2, unnormalized.
double sse(const ModelFit& fit, const NormalizedSpectrum& y);

ModelFit fit_log(const NormalizedSpectrum& y);

/// Non-continuous: each side of r0 gets its own OLS line in ln r (k = 4).
/// Continuous: the side named by `order` is fitted first, the other side's
/// line is pinned to meet it at converge_point and only its slope is fitted
/// (k = 3). converge_point defaults to r0.
ModelFit fit_piecewise_log(const NormalizedSpectrum& y, int r0, bool continuous,
                           FitOrder order = FitOrder::HighFirst,
                           std::optional<double> converge_point = std::nullopt);

/// Best piecewise fit over integer r0 in [r0_min, r0_max]; ties go to the smaller r0.
ModelFit scan_breakpoint(const NormalizedSpectrum& y, int r0_min, int r0_max, bool continuous,
                         FitOrder order = FitOrder::HighFirst);

/// Same, over the default range [2, floor(n / 5)].
ModelFit scan_breakpoint(const NormalizedSpectrum& y, bool continuous, FitOrder order = FitOrder::HighFirst);

/// Linearized start for the Beta fit: OLS of ln y on (-ln r, ln(n + 1 - r)).
BetaParams beta_init(const NormalizedSpectrum& y);

struct LmOptions {
  double initial_damping = 1e-3;
  double damping_factor = 10.0;
  double relative_tolerance = 1e-10;
  int max_iterations = 200;
  double max_damping = 1e16;
};

struct BetaFitResult {
  ModelFit fit;
  int iterations = 0;  // accepted steps
  int rejected = 0;
  bool converged = false;
};

/// Levenberg-Marquardt on the SSE with Marquardt (diagonal) damping and the
/// analytic Jacobian. Never returns an SSE above the starting SSE.
BetaFitResult fit_beta_lm(const NormalizedSpectrum& y, const BetaParams& init, const LmOptions& options = {});

ModelFit fit_beta(const NormalizedSpectrum& y, const BetaParams& init);
ModelFit fit_beta(const NormalizedSpectrum& y);

}  // namespace rankspec
