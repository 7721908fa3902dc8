#include "rankspec/fit.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankspec/error.hpp"

namespace rankspec {

std::string_view to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::Log: return "LOG";
    case ModelFamily::PiecewiseLog: return "PIECEWISE_LOG";
    case ModelFamily::Beta: return "BETA";
  }
  return "?";
}

std::string_view to_string(FitOrder o) { return o == FitOrder::HighFirst ? "HIGH_FIRST" : "LOW_FIRST"; }

int parameter_count(const ModelParams& params) {
  struct {
    int operator()(const LogParams&) const { return 2; }
    int operator()(const PiecewiseLogParams& p) const { return p.continuous ? 3 : 4; }
    int operator()(const BetaParams&) const { return 3; }
  } visitor;
  return std::visit(visitor, params);
}

ModelFit make_model(ModelParams params, int n) {
  if (n < 1) throw std::invalid_argument("model needs n >= 1");
  ModelFit fit{std::move(params), 0.0, 0, n};
  fit.k = parameter_count(fit.params);
  return fit;
}

namespace {

double eval_unchecked(const ModelParams& params, int n, int rank) {
  const double r = rank;
  if (const auto* p = std::get_if<LogParams>(&params)) return p->c + p->a * std::log(r);
  if (const auto* p = std::get_if<PiecewiseLogParams>(&params)) {
    return rank <= p->r0 ? p->c + p->a * std::log(r) : p->c_prime + p->a_prime * std::log(r);
  }
  const auto& p = std::get<BetaParams>(params);
  return p.c * std::pow(static_cast<double>(n + 1 - rank), p.b) / std::pow(r, p.a);
}

std::vector<double> log_ranks(std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::log(static_cast<double>(i + 1));
  return out;
}

struct Line {
  double intercept = 0.0;
  double slope = 0.0;
};

// OLS of y[i] on x[i] over [begin, end).
Line ols_line(std::span<const double> x, std::span<const double> y, std::size_t begin, std::size_t end) {
  const double m = static_cast<double>(end - begin);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {my - slope * mx, slope};
}

// Line through (x0, v0) with OLS slope over [begin, end).
Line pinned_line(std::span<const double> x, std::span<const double> y, std::size_t begin, std::size_t end, double x0,
                 double v0) {
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double dx = x[i] - x0;
    sxy += (y[i] - v0) * dx;
    sxx += dx * dx;
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {v0 - slope * x0, slope};
}

double segment_sse(std::span<const double> x, std::span<const double> y, std::size_t begin, std::size_t end,
                   const Line& line) {
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double e = line.intercept + line.slope * x[i] - y[i];
    s += e * e;
  }
  return s;
}

void check_breakpoint(std::size_t n, int r0) {
  if (r0 < 2 || static_cast<std::size_t>(r0) + 2 > n) {
    throw std::invalid_argument("breakpoint r0 = " + std::to_string(r0) + " must satisfy 2 <= r0 <= n - 2 (n = " +
                                std::to_string(n) + ")");
  }
}

ModelFit piecewise_with_logs(std::span<const double> lr, std::span<const double> y, int r0, bool continuous,
                             FitOrder order, double converge_point) {
  const std::size_t n = y.size();
  const auto split = static_cast<std::size_t>(r0);
  Line high, low;
  if (!continuous) {
    high = ols_line(lr, y, 0, split);
    low = ols_line(lr, y, split, n);
  } else {
    const double xc = std::log(converge_point);
    if (order == FitOrder::HighFirst) {
      high = ols_line(lr, y, 0, split);
      low = pinned_line(lr, y, split, n, xc, high.intercept + high.slope * xc);
    } else {
      low = ols_line(lr, y, split, n);
      high = pinned_line(lr, y, 0, split, xc, low.intercept + low.slope * xc);
    }
  }
  PiecewiseLogParams p{high.intercept, high.slope, low.intercept, low.slope, r0, continuous, order, converge_point};
  ModelFit fit = make_model(p, static_cast<int>(n));
  fit.sse = segment_sse(lr, y, 0, split, high) + segment_sse(lr, y, split, n, low);
  return fit;
}

}  // namespace

double eval_model(const ModelFit& fit, int rank) {
  if (rank < 1 || rank > fit.n) {
    throw std::out_of_range("rank " + std::to_string(rank) + " outside 1.." + std::to_string(fit.n));
  }
  return eval_unchecked(fit.params, fit.n, rank);
}

double sse(const ModelFit& fit, const NormalizedSpectrum& y) {
  if (static_cast<std::size_t>(fit.n) != y.source_n()) {
    throw std::invalid_argument("model n = " + std::to_string(fit.n) + " does not match data n = " +
                                std::to_string(y.source_n()));
  }
  double s = 0.0;
  for (int r = 1; r <= fit.n; ++r) {
    const double e = eval_unchecked(fit.params, fit.n, r) - y.at(static_cast<std::size_t>(r));
    s += e * e;
  }
  return s;
}

ModelFit fit_log(const NormalizedSpectrum& y) {
  const std::size_t n = y.source_n();
  if (n < 2) throw std::invalid_argument("log fit needs n >= 2");
  const auto lr = log_ranks(n);
  const double nn = static_cast<double>(n);
  double s = 0.0;
  for (double v : lr) s += v;
  const double mean_log = s / nn;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = lr[i] - mean_log;
    num += (y.values()[i] - 1.0 / nn) * dx;
    den += dx * dx;
  }
  const double a = num / den;
  ModelFit fit = make_model(LogParams{(1.0 - a * s) / nn, a}, static_cast<int>(n));
  fit.sse = sse(fit, y);
  return fit;
}

ModelFit fit_piecewise_log(const NormalizedSpectrum& y, int r0, bool continuous, FitOrder order,
                           std::optional<double> converge_point) {
  check_breakpoint(y.source_n(), r0);
  const double cp = converge_point.value_or(static_cast<double>(r0));
  if (!(cp > 0.0) || !std::isfinite(cp)) throw std::invalid_argument("converge point must be a positive rank");
  const auto lr = log_ranks(y.source_n());
  return piecewise_with_logs(lr, y.values(), r0, continuous, order, cp);
}

ModelFit scan_breakpoint(const NormalizedSpectrum& y, int r0_min, int r0_max, bool continuous, FitOrder order) {
  if (r0_min > r0_max) {
    throw std::invalid_argument("empty breakpoint range [" + std::to_string(r0_min) + ", " + std::to_string(r0_max) +
                                "]");
  }
  check_breakpoint(y.source_n(), r0_min);
  check_breakpoint(y.source_n(), r0_max);
  const auto lr = log_ranks(y.source_n());
  std::optional<ModelFit> best;
  for (int r0 = r0_min; r0 <= r0_max; ++r0) {
    ModelFit fit = piecewise_with_logs(lr, y.values(), r0, continuous, order, static_cast<double>(r0));
    // Differences at rounding level count as ties so the smaller r0 is kept.
    if (!best || fit.sse < best->sse - (1e-12 * best->sse + 1e-30)) best = std::move(fit);
  }
  return *best;
}

ModelFit scan_breakpoint(const NormalizedSpectrum& y, bool continuous, FitOrder order) {
  const int r0_max = static_cast<int>(y.source_n() / 5);
  return scan_breakpoint(y, 2, r0_max, continuous, order);
}

BetaParams beta_init(const NormalizedSpectrum& y) {
  const std::size_t n = y.source_n();
  if (n < 3) throw std::invalid_argument("beta initialization needs n >= 3");
  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), 3);
  Eigen::VectorXd target(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double v = y.values()[i];
    if (!(v > 0.0)) {
      throw InputError("beta initialization needs y_r > 0 (rank " + std::to_string(i + 1) + ")");
    }
    const auto row = static_cast<Eigen::Index>(i);
    design(row, 0) = 1.0;
    design(row, 1) = -std::log(static_cast<double>(i + 1));
    design(row, 2) = std::log(static_cast<double>(n - i));
    target(row) = std::log(v);
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(target);
  return {std::exp(coef(0)), coef(1), coef(2)};
}

namespace {

struct BetaState {
  Eigen::Vector3d p;  // (c, a, b)
  double sse = 0.0;
};

// Fills f (model values) and returns the SSE.
double beta_objective(const Eigen::Vector3d& p, std::span<const double> lr, std::span<const double> ltail,
                      std::span<const double> y, std::vector<double>& f) {
  const double log_c = std::log(p(0));
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    f[i] = std::exp(log_c - p(1) * lr[i] + p(2) * ltail[i]);
    const double e = f[i] - y[i];
    s += e * e;
  }
  return s;
}

}  // namespace

BetaFitResult fit_beta_lm(const NormalizedSpectrum& y, const BetaParams& init, const LmOptions& options) {
  const std::size_t n = y.source_n();
  if (n < 4) throw std::invalid_argument("beta fit needs n >= 4");
  if (!(init.c > 0.0) || !std::isfinite(init.a) || !std::isfinite(init.b)) {
    throw std::invalid_argument("beta initialization must have c > 0 and finite exponents");
  }
  const auto lr = log_ranks(n);
  std::vector<double> ltail(n);
  for (std::size_t i = 0; i < n; ++i) ltail[i] = std::log(static_cast<double>(n - i));
  const auto yv = y.values();

  std::vector<double> f(n), f_trial(n);
  BetaState cur{{init.c, init.a, init.b}, 0.0};
  cur.sse = beta_objective(cur.p, lr, ltail, yv, f);
  if (!std::isfinite(cur.sse)) throw NumericalError("beta fit: objective is not finite at the initial parameters");

  BetaFitResult result;
  double lambda = options.initial_damping;
  while (result.iterations < options.max_iterations) {
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    Eigen::Vector3d jte = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector3d g(f[i] / cur.p(0), -f[i] * lr[i], f[i] * ltail[i]);
      jtj.noalias() += g * g.transpose();
      jte += g * (f[i] - yv[i]);
    }
    const Eigen::Vector3d scale = jtj.diagonal().cwiseSqrt().cwiseMax(1e-300);
    const Eigen::Matrix3d scaled = jtj.array() / (scale * scale.transpose()).array();
    const Eigen::Vector3d scaled_grad = jte.cwiseQuotient(scale);

    bool accepted = false;
    while (lambda <= options.max_damping) {
      Eigen::Matrix3d system = scaled;
      system.diagonal().array() += lambda;
      const Eigen::Vector3d step = -system.ldlt().solve(scaled_grad).cwiseQuotient(scale);
      const Eigen::Vector3d trial = cur.p + step;
      if (step.allFinite() && trial(0) > 0.0) {
        const double trial_sse = beta_objective(trial, lr, ltail, yv, f_trial);
        if (std::isfinite(trial_sse) && trial_sse <= cur.sse) {
          const double decrease = cur.sse > 0.0 ? (cur.sse - trial_sse) / cur.sse : 0.0;
          cur = {trial, trial_sse};
          f.swap(f_trial);
          lambda = std::max(lambda / options.damping_factor, 1e-15);
          ++result.iterations;
          accepted = true;
          if (decrease < options.relative_tolerance) result.converged = true;
          break;
        }
      }
      ++result.rejected;
      lambda *= options.damping_factor;
    }
    if (!accepted) {
      // No step improves the objective: a minimum to working precision.
      result.converged = true;
    }
    if (result.converged) break;
  }

  result.fit = make_model(BetaParams{cur.p(0), cur.p(1), cur.p(2)}, static_cast<int>(n));
  result.fit.sse = cur.sse;
  return result;
}

ModelFit fit_beta(const NormalizedSpectrum& y, const BetaParams& init) { return fit_beta_lm(y, init).fit; }

ModelFit fit_beta(const NormalizedSpectrum& y) { return fit_beta(y, beta_init(y)); }

}  // namespace rankspec
