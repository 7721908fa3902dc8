#include "rankspec/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <thread>

#include "rankspec/error.hpp"
#include "rankspec/fit.hpp"
#include "rankspec/ingest.hpp"
#include "rankspec/plot.hpp"
#include "rankspec/resample.hpp"
#include "rankspec/select.hpp"
#include "rankspec/spectrum.hpp"

namespace rankspec {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint64_t kDefaultSeed = 1;
constexpr double kTopShareFractions[] = {0.01, 0.05, 0.10, 0.25};

// Flag values shared by the subcommands; CLI11 binds straight into these.
struct Options {
  std::string input;
  std::string format = "counts";
  bool strict = false;
  std::string output;

  std::string model;
  std::string breakpoint = "auto";
  bool continuous = false;
  std::string order = "high";
  std::optional<double> converge_point;
  std::string criterion = "aic";

  int replicates = 1000;
  std::optional<std::uint64_t> seed;
  int workers = 0;
  std::string histogram_out;
  bool details = false;

  std::string figure;
  std::string view;

  bool use_fixture = false;
  int n = 1280;
  std::int64_t total = 9505;
  std::string noise = "none";
  std::optional<double> c, a, b, c2, a2;
  int r0 = 15;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json optional_number(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("RANKSPEC_SEED"); env && *env) {
    std::uint64_t v = 0;
    const std::string_view s(env);
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) throw UsageError("RANKSPEC_SEED is not an unsigned integer");
    return v;
  }
  return kDefaultSeed;
}

RankSpectrum load_spectrum(const Options& o) {
  const std::string content = read_text_file(o.input);
  auto pairs = o.format == "pairs" ? parse_pairs_file(content, o.strict) : parse_counts_file(content);
  if (pairs.empty()) throw InputError("'" + o.input + "' contains no data");
  return build_spectrum(std::move(pairs));
}

void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.output.empty() || o.output == "-") {
    out << text;
    return;
  }
  std::ofstream f(o.output, std::ios::binary);
  if (!f) throw InputError("cannot write '" + o.output + "'");
  f << text;
  if (!f) throw InputError("error writing '" + o.output + "'");
}

void emit_json(const Options& o, const Json& j, std::ostream& out) { emit(o, j.dump(2) + "\n", out); }

FitOrder parse_order(const std::string& s) { return s == "low" ? FitOrder::LowFirst : FitOrder::HighFirst; }

Json params_json(const ModelParams& params) {
  return std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogParams>) {
          return {{"C", number(p.c)}, {"a", number(p.a)}};
        } else if constexpr (std::is_same_v<T, PiecewiseLogParams>) {
          return {{"C", number(p.c)},
                  {"a", number(p.a)},
                  {"C_prime", number(p.c_prime)},
                  {"a_prime", number(p.a_prime)},
                  {"r0", p.r0},
                  {"continuous", p.continuous},
                  {"fit_order", std::string(to_string(p.fit_order))},
                  {"converge_point", p.continuous ? number(p.converge_point) : Json(nullptr)}};
        } else {
          return {{"C", number(p.c)}, {"a", number(p.a)}, {"b", number(p.b)}};
        }
      },
      params);
}

Json fit_json(const ModelFit& f) {
  Json j{{"family", std::string(to_string(f.family()))}, {"n", f.n}, {"k", f.k}, {"sse", number(f.sse)}};
  j["aic"] = f.sse > 0.0 ? number(aic(f.sse, f.n, f.k)) : Json(nullptr);
  j["bic"] = f.sse > 0.0 ? number(bic(f.sse, f.n, f.k)) : Json(nullptr);
  j["params"] = params_json(f.params);
  return j;
}

ModelFit fit_piecewise(const NormalizedSpectrum& y, const Options& o) {
  const auto order = parse_order(o.order);
  if (o.breakpoint == "auto") {
    if (o.converge_point) throw UsageError("--converge-point needs an explicit --breakpoint");
    return scan_breakpoint(y, o.continuous, order);
  }
  int r0 = 0;
  const auto [end, ec] = std::from_chars(o.breakpoint.data(), o.breakpoint.data() + o.breakpoint.size(), r0);
  if (ec != std::errc{} || end != o.breakpoint.data() + o.breakpoint.size())
    throw UsageError("--breakpoint must be an integer or 'auto'");
  return fit_piecewise_log(y, r0, o.continuous, order, o.converge_point);
}

std::vector<ModelFit> fit_all(const NormalizedSpectrum& y, const Options& o) {
  return {fit_log(y), fit_piecewise(y, o), fit_beta(y)};
}

int cmd_stats(const Options& o, std::ostream& out) {
  const auto s = load_spectrum(o);
  const auto st = descriptive_stats(s);
  Json shares = Json::array();
  for (double f : kTopShareFractions)
    shares.push_back({{"fraction", f}, {"items", top_share_items(s, f)}, {"share", number(top_share(s, f))}});
  Json j{{"n_syllables", st.n_syllables},
         {"total_characters", st.total_characters},
         {"mean", number(st.mean)},
         {"median", number(st.median)},
         {"sd", number(st.sd)},
         {"mad", number(st.mad)},
         {"coverage_mean_sd", number(st.coverage_mean_sd)},
         {"coverage_median_mad", number(st.coverage_median_mad)},
         {"singleton_count", st.singleton_count},
         {"gini", number(gini(s))},
         {"lorenz_gini", number(lorenz_gini(lorenz_curve(s)))},
         {"top_shares", shares}};
  emit_json(o, j, out);
  return kExitOk;
}

int cmd_fit(const Options& o, std::ostream& out) {
  const auto y = normalize(load_spectrum(o));
  Json j;
  if (o.model == "log") {
    j = fit_json(fit_log(y));
  } else if (o.model == "plog") {
    j = fit_json(fit_piecewise(y, o));
  } else {
    const auto r = fit_beta_lm(y, beta_init(y));
    j = fit_json(r.fit);
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
  }
  emit_json(o, j, out);
  return kExitOk;
}

int cmd_select(const Options& o, std::ostream& out) {
  const auto y = normalize(load_spectrum(o));
  const auto fits = fit_all(y, o);
  const auto report = rank_models(fits, o.criterion == "bic" ? Criterion::Bic : Criterion::Aic);
  Json entries = Json::array();
  Json names = Json::array();
  for (const auto& e : report.entries) {
    Json fj = fit_json(e.fit);
    fj["perfect_fit"] = e.perfect_fit();
    entries.push_back(std::move(fj));
    names.push_back(std::string(to_string(e.family)));
  }
  Json deltas = Json::array();
  for (const auto& row : report.deltas) {
    Json r = Json::array();
    for (const auto& d : row) r.push_back(optional_number(d));
    deltas.push_back(std::move(r));
  }
  Json j{{"criterion", std::string(to_string(report.criterion))},
         {"n", report.n},
         {"order", names},
         {"best_by_aic", std::string(to_string(report.best_by_aic))},
         {"best_by_bic", std::string(to_string(report.best_by_bic))},
         {"entries", entries},
         {"delta_aic", deltas}};
  emit_json(o, j, out);
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const auto s = load_spectrum(o);
  const std::uint64_t seed = resolve_seed(o);
  const int workers = o.workers > 0 ? o.workers : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  const auto rep = empirical_pvalue(s, o.replicates, seed, workers);

  Json hist{{"origin", number(rep.histogram.origin)},
            {"bin_width", number(rep.histogram.bin_width)},
            {"counts", rep.histogram.counts}};
  Json j{{"replicates", rep.replicates},
         {"seed", rep.seed},
         {"valid", rep.valid},
         {"flagged", rep.flagged},
         {"redraws", rep.redraws},
         {"p_value", number(rep.p_value)},
         {"frac_above_aic_margin", number(rep.frac_above_aic_margin)},
         {"frac_above_bic_margin", number(rep.frac_above_bic_margin)},
         {"mean_n_effective", number(rep.mean_n_effective)},
         {"sd_n_effective", number(rep.sd_n_effective)},
         {"expected_n_effective", number(rep.expected_n_effective)},
         {"histogram", hist}};
  if (o.details) {
    Json d = Json::array();
    for (const auto& r : rep.details)
      d.push_back({{"replicate", r.replicate_index},
                   {"n_effective", r.n_effective},
                   {"status", std::string(to_string(r.status))},
                   {"sse_beta", r.valid() ? number(r.sse_beta) : Json(nullptr)},
                   {"sse_plog", r.valid() ? number(r.sse_plog) : Json(nullptr)},
                   {"r0", r.valid() ? Json(r.r0) : Json(nullptr)},
                   {"statistic", r.valid() ? number(r.statistic) : Json(nullptr)}});
    j["details"] = std::move(d);
  }
  if (!o.histogram_out.empty()) write_artifact(statistic_histogram_plot(rep.histogram), o.histogram_out);
  emit_json(o, j, out);
  return kExitOk;
}

int cmd_plot(const Options& o) {
  if (o.output.empty()) throw UsageError("plot needs -o <file.svg>");
  const auto s = load_spectrum(o);
  PlotArtifact art;
  if (o.figure == "histogram") {
    art = count_histogram_plot(s);
  } else {
    const std::string view_name = o.view.empty() ? (o.figure == "fit" ? "loglin" : "linlin") : o.view;
    const auto view = parse_view(view_name);
    if (!view) throw UsageError("unknown view '" + view_name + "'");
    std::vector<ModelFit> fits;
    if (o.figure == "fit") fits = fit_all(normalize(s), o);
    art = spectrum_plot(s, *view, fits);
  }
  write_artifact(art, o.output);
  return kExitOk;
}

int cmd_generate(const Options& o, std::ostream& out) {
  if (o.output.empty()) throw UsageError("generate needs -o <file.csv>");
  const std::uint64_t seed = resolve_seed(o);
  std::vector<SpectrumEntry> entries;
  if (o.use_fixture) {
    if (!o.model.empty()) throw UsageError("--paper-fixture and --model are exclusive");
    FixtureSpec spec;
    spec.seed = seed;
    entries = generate_fixture(spec);
  } else {
    if (o.model.empty()) throw UsageError("generate needs --paper-fixture or --model");
    ModelParams params;
    if (o.model == "log") {
      const double a = o.a.value_or(-1e-3);
      double c = 0.0;
      if (o.c) {
        c = *o.c;
      } else {
        double log_sum = 0.0;
        for (int r = 1; r <= o.n; ++r) log_sum += std::log(static_cast<double>(r));
        c = (1.0 - a * log_sum) / o.n;
      }
      params = LogParams{c, a};
    } else if (o.model == "plog") {
      if (!o.c || !o.a || !o.c2 || !o.a2) throw UsageError("--model plog needs --c, --a, --c2 and --a2");
      PiecewiseLogParams p;
      p.c = *o.c;
      p.a = *o.a;
      p.c_prime = *o.c2;
      p.a_prime = *o.a2;
      p.r0 = o.r0;
      params = p;
    } else {
      params = BetaParams{o.c.value_or(1.0), o.a.value_or(0.0), o.b.value_or(0.0)};
    }
    entries = generate_from_model(params, o.n, o.total, o.noise == "poisson" ? Noise::Poisson : Noise::None, seed);
  }
  emit(o, write_counts_file(entries), out);
  return kExitOk;
}

void add_input(CLI::App* cmd, Options& o) {
  cmd->add_option("input", o.input, "Counts CSV or pairs TSV")->required();
  cmd->add_option("--format", o.format, "Input format")->check(CLI::IsMember({"counts", "pairs"}));
  cmd->add_flag("--strict", o.strict, "Require tones 1-4 and known base syllables (pairs input)");
}

void add_piecewise(CLI::App* cmd, Options& o) {
  cmd->add_option("--breakpoint", o.breakpoint, "Breakpoint rank or 'auto' (scan [2, n/5])");
  cmd->add_flag("--continuous", o.continuous, "Make the two segments meet");
  cmd->add_option("--order", o.order, "Segment fitted first when continuous")->check(CLI::IsMember({"high", "low"}));
  cmd->add_option("--converge-point", o.converge_point, "Rank where the segments meet (default: breakpoint)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Ranked count spectra: statistics, model fits, selection and resampling", "rankspec"};
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "Write a counts file (reference fixture or model draw)");
  generate->add_flag("--paper-fixture", o.use_fixture, "Synthetic 1280-entry fixture");
  generate->add_option("--model", o.model, "Model family")->check(CLI::IsMember({"log", "plog", "beta"}));
  generate->add_option("--n", o.n, "Number of ranks")->check(CLI::Range(4, 10'000'000));
  generate->add_option("--total", o.total, "Total count")->check(CLI::PositiveNumber);
  generate->add_option("--noise", o.noise, "Rounding or Poisson draws")->check(CLI::IsMember({"none", "poisson"}));
  generate->add_option("--c", o.c, "Intercept / scale");
  generate->add_option("--a", o.a, "Slope / exponent a");
  generate->add_option("--b", o.b, "Beta exponent b");
  generate->add_option("--c2", o.c2, "Piecewise: intercept above the breakpoint");
  generate->add_option("--a2", o.a2, "Piecewise: slope above the breakpoint");
  generate->add_option("--r0", o.r0, "Piecewise: breakpoint rank");
  generate->add_option("--seed", o.seed, "Seed (default: $RANKSPEC_SEED, then 1)");
  generate->add_option("-o,--output", o.output, "Output counts file")->required();

  auto* stats = app.add_subcommand("stats", "Descriptive and inequality statistics");
  add_input(stats, o);
  stats->add_option("-o,--output", o.output, "JSON output file (default stdout)");

  auto* fit = app.add_subcommand("fit", "Fit one model family");
  add_input(fit, o);
  fit->add_option("--model", o.model, "Model family")->required()->check(CLI::IsMember({"log", "plog", "beta"}));
  add_piecewise(fit, o);
  fit->add_option("-o,--output", o.output, "JSON output file (default stdout)");

  auto* select = app.add_subcommand("select", "Fit all families and rank them");
  add_input(select, o);
  add_piecewise(select, o);
  select->add_option("--criterion", o.criterion, "Ranking criterion")->check(CLI::IsMember({"aic", "bic"}));
  select->add_option("-o,--output", o.output, "JSON output file (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "Poisson replicates and the empirical p-value");
  add_input(simulate, o);
  simulate->add_option("--replicates", o.replicates, "Number of replicates")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", o.seed, "Seed (default: $RANKSPEC_SEED, then 1)");
  simulate->add_option("--workers", o.workers, "Worker threads (default: all cores)")->check(CLI::PositiveNumber);
  simulate->add_option("--histogram-out", o.histogram_out, "SVG of the statistic histogram (TSV alongside)");
  simulate->add_flag("--details", o.details, "Include per-replicate results");
  simulate->add_option("-o,--output", o.output, "JSON output file (default stdout)");

  auto* plot = app.add_subcommand("plot", "Write an SVG figure and its TSV data");
  add_input(plot, o);
  plot->add_option("--figure", o.figure, "Figure kind")
      ->required()
      ->check(CLI::IsMember({"histogram", "spectrum", "fit"}));
  plot->add_option("--view", o.view, "linlin, loglin, linlog or loglog");
  add_piecewise(plot, o);
  plot->add_option("-o,--output", o.output, "SVG output file")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*generate) return cmd_generate(o, out);
    if (*stats) return cmd_stats(o, out);
    if (*fit) return cmd_fit(o, out);
    if (*select) return cmd_select(o, out);
    if (*simulate) return cmd_simulate(o, out);
    if (*plot) return cmd_plot(o);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace rankspec
