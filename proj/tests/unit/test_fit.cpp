#include <doctest.h>

#include <cmath>
#include <random>

#include "rankspec/error.hpp"
#include "rankspec/fit.hpp"
#include "rankspec/ingest.hpp"

using namespace rankspec;

namespace {

NormalizedSpectrum from_function(int n, auto&& f) {
  std::vector<double> v(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (int r = 1; r <= n; ++r) sum += v[static_cast<std::size_t>(r - 1)] = f(r);
  for (auto& x : v) x /= sum;
  return NormalizedSpectrum::from_values(std::move(v));
}

double log_rank_sum(int n) { return std::lgamma(n + 1.0); }

// Two log segments meeting nowhere in particular, breakpoint 15.
constexpr double kHighC = 0.00877, kHighA = -0.00192, kLowC = 0.00532, kLowA = -0.000739;

double two_segment(int r) { return r <= 15 ? kHighC + kHighA * std::log(r) : kLowC + kLowA * std::log(r); }

double two_segment_sum(int n) {
  double s = 0.0;
  for (int r = 1; r <= n; ++r) s += two_segment(r);
  return s;
}

NormalizedSpectrum random_spectrum(std::mt19937_64& gen, int n) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = u(gen);
  std::sort(v.begin(), v.end(), std::greater<>{});
  double s = 0.0;
  for (double x : v) s += x;
  for (auto& x : v) x /= s;
  return NormalizedSpectrum::from_values(std::move(v));
}

}  // namespace

TEST_CASE("eval_model") {
  CHECK(eval_model(make_model(LogParams{5.78e-3, -8.11e-4}, 1280), 1) == doctest::Approx(5.78e-3));
  const auto flat = make_model(BetaParams{1.0, 0.0, 0.0}, 10);
  for (int r = 1; r <= 10; ++r) CHECK(eval_model(flat, r) == 1.0);
  const auto beta = make_model(BetaParams{5.95e-6, 0.324, 1.025}, 1280);
  CHECK(eval_model(beta, 1280) == doctest::Approx(5.95e-6 / std::pow(1280.0, 0.324)).epsilon(1e-12));
  CHECK(eval_model(beta, 1280) == doctest::Approx(5.84e-7).epsilon(0.01));
  CHECK_THROWS_AS(eval_model(beta, 0), std::out_of_range);
  CHECK_THROWS_AS(eval_model(beta, 1281), std::out_of_range);

  PiecewiseLogParams p;
  p.c = 1.0;
  p.a = -0.1;
  p.c_prime = 2.0;
  p.a_prime = -0.5;
  p.r0 = 3;
  const auto pw = make_model(p, 10);
  CHECK(eval_model(pw, 3) == doctest::Approx(1.0 - 0.1 * std::log(3.0)));
  CHECK(eval_model(pw, 4) == doctest::Approx(2.0 - 0.5 * std::log(4.0)));
}

TEST_CASE("parameter counts") {
  CHECK(make_model(LogParams{}, 5).k == 2);
  CHECK(make_model(BetaParams{}, 5).k == 3);
  PiecewiseLogParams p;
  CHECK(make_model(p, 5).k == 4);
  p.continuous = true;
  CHECK(make_model(p, 5).k == 3);
}

TEST_CASE("beta mirror symmetry") {
  // (a, b) -> (-b, -a) with ranks reversed gives the same values.
  const int n = 9;
  const auto f = make_model(BetaParams{0.7, 0.4, 1.3}, n);
  const auto g = make_model(BetaParams{0.7, -1.3, -0.4}, n);
  for (int r = 1; r <= n; ++r) CHECK(eval_model(f, r) == doctest::Approx(eval_model(g, n + 1 - r)).epsilon(1e-13));
}

TEST_CASE("sse") {
  const auto y = NormalizedSpectrum::from_values({0.5, 0.5});
  CHECK(sse(make_model(LogParams{0.5, 0.0}, 2), y) == 0.0);
  const auto z = NormalizedSpectrum::from_values({0.6, 0.4});
  CHECK(sse(make_model(LogParams{0.0, 0.0}, 2), z) == doctest::Approx(0.52));
  CHECK_THROWS_AS(sse(make_model(LogParams{}, 3), z), std::invalid_argument);
}

TEST_CASE("fit_log") {
  const int n = 1280;
  const double a = -8.11e-4;
  const double c = (1.0 - a * log_rank_sum(n)) / n;
  CHECK(std::abs(c - 5.78e-3) / 5.78e-3 < 0.005);

  // Raw values sum to one by construction; go negative in the far tail.
  std::vector<double> v(n);
  for (int r = 1; r <= n; ++r) v[static_cast<std::size_t>(r - 1)] = c + a * std::log(r);
  const auto y = NormalizedSpectrum::from_values(v);
  const auto fit = fit_log(y);
  const auto& p = std::get<LogParams>(fit.params);
  CHECK(std::abs(p.a - a) < 1e-12);
  CHECK(fit.sse < 1e-20);
  CHECK(fit.k == 2);

  double total = 0.0;
  for (int r = 1; r <= n; ++r) total += eval_model(fit, r);
  CHECK(std::abs(total - 1.0) < 1e-9);

  const auto flat = fit_log(from_function(50, [](int) { return 1.0; }));
  CHECK(std::abs(std::get<LogParams>(flat.params).a) < 1e-15);
  CHECK(std::get<LogParams>(flat.params).c == doctest::Approx(1.0 / 50));

  CHECK_THROWS_AS(fit_log(NormalizedSpectrum::from_values({1.0})), std::invalid_argument);
}

TEST_CASE("fit_piecewise_log non-continuous recovers both segments") {
  const int n = 1280;
  const auto y = from_function(n, two_segment);
  const double s = two_segment_sum(n);
  const auto fit = fit_piecewise_log(y, 15, false);
  const auto& p = std::get<PiecewiseLogParams>(fit.params);
  CHECK(std::abs(p.a - kHighA / s) < 1e-6);
  CHECK(std::abs(p.a_prime - kLowA / s) < 1e-6);
  CHECK(p.c == doctest::Approx(kHighC / s).epsilon(1e-9));
  CHECK(p.c_prime == doctest::Approx(kLowC / s).epsilon(1e-9));
  CHECK(fit.sse < 1e-25);
  CHECK(fit.k == 4);
}

TEST_CASE("fit_piecewise_log on flat data") {
  const auto y = from_function(40, [](int) { return 1.0; });
  for (int r0 : {2, 7, 20}) {
    const auto& p = std::get<PiecewiseLogParams>(fit_piecewise_log(y, r0, false).params);
    CHECK(std::abs(p.a) < 1e-14);
    CHECK(std::abs(p.a_prime) < 1e-14);
    CHECK(p.c == doctest::Approx(1.0 / 40));
    CHECK(p.c_prime == doctest::Approx(1.0 / 40));
  }
}

TEST_CASE("fit_piecewise_log continuous") {
  const int n = 400;
  const auto y = from_function(n, two_segment);
  for (auto order : {FitOrder::HighFirst, FitOrder::LowFirst}) {
    for (double cp : {15.0, 15.5, 16.0}) {
      const auto fit = fit_piecewise_log(y, 15, true, order, cp);
      const auto& p = std::get<PiecewiseLogParams>(fit.params);
      CHECK(fit.k == 3);
      CHECK(p.continuous);
      CHECK(p.fit_order == order);
      CHECK(std::abs((p.c + p.a * std::log(cp)) - (p.c_prime + p.a_prime * std::log(cp))) < 1e-10);
    }
  }
  // The segments do not meet, so which one is fitted first changes the result.
  const double high_first = fit_piecewise_log(y, 15, true, FitOrder::HighFirst).sse;
  const double low_first = fit_piecewise_log(y, 15, true, FitOrder::LowFirst).sse;
  CHECK(std::abs(high_first - low_first) > 1e-3 * std::max(high_first, low_first));

  const auto& p = std::get<PiecewiseLogParams>(fit_piecewise_log(y, 15, true).params);
  CHECK(p.converge_point == 15.0);
}

TEST_CASE("fit_piecewise_log range checks") {
  const auto y = from_function(10, [](int r) { return 1.0 / r; });
  CHECK_THROWS_AS(fit_piecewise_log(y, 1, false), std::invalid_argument);
  CHECK_THROWS_AS(fit_piecewise_log(y, 9, false), std::invalid_argument);
  CHECK_NOTHROW(fit_piecewise_log(y, 8, false));
}

TEST_CASE("scan_breakpoint") {
  const int n = 1280;
  const auto y = from_function(n, two_segment);
  const auto fit = scan_breakpoint(y, false);
  CHECK(std::get<PiecewiseLogParams>(fit.params).r0 == 15);

  const auto single = from_function(200, [](int r) { return 0.02 - 0.003 * std::log(r); });
  CHECK(std::get<PiecewiseLogParams>(scan_breakpoint(single, 3, 40, false).params).r0 == 3);
  for (int r0 = 3; r0 <= 40; ++r0) CHECK(fit_piecewise_log(single, r0, false).sse < 1e-18);

  CHECK_THROWS_AS(scan_breakpoint(y, 10, 9, false), std::invalid_argument);

  const auto fixture = normalize(build_spectrum(generate_fixture()));
  const int r0 = std::get<PiecewiseLogParams>(scan_breakpoint(fixture, false).params).r0;
  CHECK(r0 >= 10);
  CHECK(r0 <= 20);
}

TEST_CASE("nested-model dominance") {
  std::mt19937_64 gen(21);
  std::uniform_int_distribution<int> size(20, 400);
  for (int t = 0; t < 30; ++t) {
    const auto y = random_spectrum(gen, size(gen));
    CHECK(scan_breakpoint(y, false).sse <= fit_log(y).sse + 1e-15);
  }
}

TEST_CASE("beta_init") {
  const int n = 10;
  const auto y = from_function(n, [&](int r) { return std::pow(n + 1.0 - r, 1.0) / std::pow(r, 0.5); });
  const auto p = beta_init(y);
  CHECK(std::abs(p.a - 0.5) < 1e-9);
  CHECK(std::abs(p.b - 1.0) < 1e-9);

  const auto zipf = beta_init(from_function(50, [](int r) { return 1.0 / r; }));
  CHECK(std::abs(zipf.b) < 1e-9);
  CHECK(std::abs(zipf.a - 1.0) < 1e-9);

  std::vector<double> v(y.values().begin(), y.values().end());
  v[3] *= 1.1;
  double s = 0.0;
  for (double x : v) s += x;
  for (auto& x : v) x /= s;
  const auto noisy = beta_init(NormalizedSpectrum::from_values(v));
  CHECK(std::isfinite(noisy.c));
  CHECK(std::isfinite(noisy.a));
  CHECK(std::isfinite(noisy.b));

  CHECK_THROWS_AS(beta_init(NormalizedSpectrum::from_values({0.5, 0.5, 0.0})), InputError);
}

TEST_CASE("fit_beta recovers noiseless exponents") {
  const int n = 1280;
  const auto y = from_function(n, [&](int r) { return 5.95e-6 * std::pow(n + 1.0 - r, 1.025) / std::pow(r, 0.324); });
  // Start away from the answer so the iteration has work to do.
  const auto r = fit_beta_lm(y, BetaParams{1e-5, 0.2, 0.8});
  const auto& p = std::get<BetaParams>(r.fit.params);
  CHECK(r.converged);
  CHECK(std::abs(p.a - 0.324) < 1e-4);
  CHECK(std::abs(p.b - 1.025) < 1e-4);
  CHECK(r.fit.sse < 1e-18);
  CHECK(r.fit.k == 3);
}

TEST_CASE("fit_beta at a fixed point") {
  const int n = 200;
  const auto y = from_function(n, [&](int r) { return std::pow(n + 1.0 - r, 0.9) / std::pow(r, 0.4); });
  const auto start = fit_beta(y);
  const auto& s = std::get<BetaParams>(start.params);
  const auto again = fit_beta_lm(y, s);
  const auto& p = std::get<BetaParams>(again.fit.params);
  CHECK(again.iterations <= 1);
  CHECK(std::abs(p.a - s.a) < 1e-10);
  CHECK(std::abs(p.b - s.b) < 1e-10);
  CHECK(std::abs(p.c - s.c) < 1e-10 * s.c);
}

TEST_CASE("fit_beta never worsens its start") {
  std::mt19937_64 gen(8);
  for (int t = 0; t < 20; ++t) {
    const auto y = random_spectrum(gen, 30 + t * 10);
    const auto init = beta_init(y);
    const double before = sse(make_model(init, static_cast<int>(y.source_n())), y);
    CHECK(fit_beta(y, init).sse <= before);
  }
}

TEST_CASE("fit_beta on the fixture") {
  const auto y = normalize(build_spectrum(generate_fixture()));
  const auto fit = fit_beta(y);
  const auto& p = std::get<BetaParams>(fit.params);
  CHECK(p.b > p.a);
  CHECK(p.c > 0.0);
  // Deterministic to the bit.
  const auto again = fit_beta(y);
  CHECK(std::get<BetaParams>(again.params).a == p.a);
  CHECK(again.sse == fit.sse);
}

TEST_CASE("fit_beta argument checks") {
  const auto y = from_function(10, [](int r) { return 1.0 / r; });
  CHECK_THROWS_AS(fit_beta_lm(y, BetaParams{0.0, 1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_beta_lm(NormalizedSpectrum::from_values({0.5, 0.3, 0.2}), BetaParams{}), std::invalid_argument);
}
