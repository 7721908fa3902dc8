#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rankspec/error.hpp"
#include "rankspec/fit.hpp"
#include "rankspec/ingest.hpp"
#include "rankspec/resample.hpp"
#include "rankspec/select.hpp"
#include "rankspec/spectrum.hpp"

namespace py = pybind11;
using namespace rankspec;

namespace {

using Pairs = std::vector<std::pair<std::string, std::int64_t>>;

RankSpectrum to_spectrum(const Pairs& pairs) {
  std::vector<SpectrumEntry> entries;
  entries.reserve(pairs.size());
  for (const auto& [label, count] : pairs) entries.push_back({label, count});
  return build_spectrum(std::move(entries));
}

Pairs to_pairs(std::span<const SpectrumEntry> entries) {
  Pairs out;
  for (const auto& e : entries) out.emplace_back(e.label, e.count);
  return out;
}

NormalizedSpectrum values_of(const Pairs& pairs) { return normalize(to_spectrum(pairs)); }

py::dict params_dict(const ModelParams& params) {
  py::dict d;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        d["C"] = p.c;
        d["a"] = p.a;
        if constexpr (std::is_same_v<T, PiecewiseLogParams>) {
          d["C_prime"] = p.c_prime;
          d["a_prime"] = p.a_prime;
          d["r0"] = p.r0;
          d["continuous"] = p.continuous;
          d["fit_order"] = std::string(to_string(p.fit_order));
        } else if constexpr (std::is_same_v<T, BetaParams>) {
          d["b"] = p.b;
        }
      },
      params);
  return d;
}

py::dict fit_dict(const ModelFit& f) {
  py::dict d;
  d["family"] = std::string(to_string(f.family()));
  d["n"] = f.n;
  d["k"] = f.k;
  d["sse"] = f.sse;
  d["params"] = params_dict(f.params);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Ranked count spectra: statistics, model fits, selection and Poisson resampling";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "ranked",
      [](const Pairs& pairs) { return to_pairs(to_spectrum(pairs).entries()); },
      py::arg("pairs"), "Sort (label, count) pairs into rank order.");

  m.def(
      "normalize", [](const Pairs& pairs) {
        const auto y = values_of(pairs);
        return std::vector<double>(y.values().begin(), y.values().end());
      },
      py::arg("pairs"));

  m.def(
      "stats",
      [](const Pairs& pairs) {
        const auto s = to_spectrum(pairs);
        const auto st = descriptive_stats(s);
        py::dict d;
        d["n_syllables"] = st.n_syllables;
        d["total_characters"] = st.total_characters;
        d["mean"] = st.mean;
        d["median"] = st.median;
        d["sd"] = st.sd;
        d["mad"] = st.mad;
        d["coverage_mean_sd"] = st.coverage_mean_sd;
        d["coverage_median_mad"] = st.coverage_median_mad;
        d["singleton_count"] = st.singleton_count;
        d["gini"] = gini(s);
        return d;
      },
      py::arg("pairs"));

  m.def(
      "gini", [](const Pairs& pairs) { return gini(to_spectrum(pairs)); }, py::arg("pairs"));
  m.def(
      "top_share", [](const Pairs& pairs, double fraction) { return top_share(to_spectrum(pairs), fraction); },
      py::arg("pairs"), py::arg("fraction"));

  m.def(
      "fit_log", [](const Pairs& pairs) { return fit_dict(fit_log(values_of(pairs))); }, py::arg("pairs"));
  m.def(
      "fit_piecewise_log",
      [](const Pairs& pairs, std::optional<int> r0, bool continuous, const std::string& order) {
        const auto y = values_of(pairs);
        const auto o = order == "low" ? FitOrder::LowFirst : FitOrder::HighFirst;
        return fit_dict(r0 ? fit_piecewise_log(y, *r0, continuous, o) : scan_breakpoint(y, continuous, o));
      },
      py::arg("pairs"), py::arg("r0") = py::none(), py::arg("continuous") = false, py::arg("order") = "high",
      "Fixed breakpoint r0, or a scan over [2, n/5] when r0 is None.");
  m.def(
      "fit_beta", [](const Pairs& pairs) { return fit_dict(fit_beta(values_of(pairs))); }, py::arg("pairs"));

  m.def("aic", &aic, py::arg("sse"), py::arg("n"), py::arg("k"));
  m.def("bic", &bic, py::arg("sse"), py::arg("n"), py::arg("k"));

  m.def(
      "select",
      [](const Pairs& pairs, const std::string& criterion) {
        const auto y = values_of(pairs);
        const std::vector<ModelFit> fits{fit_log(y), scan_breakpoint(y, false), fit_beta(y)};
        const auto report = rank_models(fits, criterion == "bic" ? Criterion::Bic : Criterion::Aic);
        py::list entries, order;
        for (const auto& e : report.entries) {
          auto d = fit_dict(e.fit);
          d["aic"] = e.aic;
          d["bic"] = e.bic;
          d["perfect_fit"] = e.perfect_fit();
          entries.append(d);
          order.append(std::string(to_string(e.family)));
        }
        py::dict d;
        d["criterion"] = std::string(to_string(report.criterion));
        d["n"] = report.n;
        d["order"] = order;
        d["entries"] = entries;
        d["best_by_aic"] = std::string(to_string(report.best_by_aic));
        d["best_by_bic"] = std::string(to_string(report.best_by_bic));
        return d;
      },
      py::arg("pairs"), py::arg("criterion") = "aic");

  m.def(
      "empirical_pvalue",
      [](const Pairs& pairs, int replicates, std::uint64_t seed, int workers) {
        const auto s = to_spectrum(pairs);
        PValueReport r;
        {
          py::gil_scoped_release release;
          r = empirical_pvalue(s, replicates, seed, workers);
        }
        py::dict d;
        d["replicates"] = r.replicates;
        d["valid"] = r.valid;
        d["flagged"] = r.flagged;
        d["p_value"] = r.p_value;
        d["mean_n_effective"] = r.mean_n_effective;
        d["expected_n_effective"] = r.expected_n_effective;
        d["statistics"] = r.statistics;
        return d;
      },
      py::arg("pairs"), py::arg("replicates"), py::arg("seed"), py::arg("workers") = 1);

  m.def(
      "validate_pinyin",
      [](const std::string& token, bool strict) {
        const auto s = validate_pinyin(token, strict);
        return py::make_tuple(s.base, s.tone);
      },
      py::arg("token"), py::arg("strict") = false);

  m.def(
      "parse_counts", [](const std::string& content) { return to_pairs(parse_counts_file(content)); },
      py::arg("content"));
  m.def(
      "parse_pairs",
      [](const std::string& content, bool strict) { return to_pairs(parse_pairs_file(content, strict)); },
      py::arg("content"), py::arg("strict") = false);

  m.def(
      "reference_fixture",
      [](std::uint64_t seed) {
        FixtureSpec spec;
        spec.seed = seed;
        return to_pairs(generate_fixture(spec));
      },
      py::arg("seed") = 1);
}
