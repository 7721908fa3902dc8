#include "rankspec/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <vector>

#include "rankspec/error.hpp"

namespace rankspec {

std::string_view to_string(PlotView v) {
  switch (v) {
    case PlotView::LinLin: return "linlin";
    case PlotView::LogLin: return "loglin";
    case PlotView::LinLog: return "linlog";
    case PlotView::LogLog: return "loglog";
  }
  return "?";
}

std::optional<PlotView> parse_view(std::string_view name) {
  for (auto v : {PlotView::LinLin, PlotView::LogLin, PlotView::LinLog, PlotView::LogLog})
    if (to_string(v) == name) return v;
  return std::nullopt;
}

std::string format_number(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 30, kBottom = 50;

// Fixed two-decimal pixel coordinates keep the SVG bytes stable.
std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Tick {
  double value;  // axis coordinate (already log-transformed on log axes)
  std::string label;
};

class Axis {
 public:
  Axis(bool log, double lo, double hi) : log_(log) {
    lo_ = log ? std::log(lo) : lo;
    hi_ = log ? std::log(hi) : hi;
    if (!(hi_ > lo_)) {
      lo_ -= 1.0;
      hi_ += 1.0;
    }
  }

  bool log() const { return log_; }
  bool shows(double v) const { return !log_ || (v > 0.0 && std::isfinite(v)); }
  double coord(double v) const { return log_ ? std::log(v) : v; }
  double frac(double v) const { return (coord(v) - lo_) / (hi_ - lo_); }

  std::vector<Tick> ticks() const {
    std::vector<Tick> out;
    if (log_) {
      const int k0 = static_cast<int>(std::ceil(lo_ / std::log(10.0) - 1e-9));
      const int k1 = static_cast<int>(std::floor(hi_ / std::log(10.0) + 1e-9));
      for (int k = k0; k <= k1; ++k) {
        const std::string label = k >= 0 && k <= 6 ? format_number(std::pow(10.0, k)) : "1e" + std::to_string(k);
        out.push_back({k * std::log(10.0), label});
      }
      return out;
    }
    const double raw = (hi_ - lo_) / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      step = m * mag;
      if (step >= raw) break;
    }
    for (double t = std::ceil(lo_ / step) * step; t <= hi_ + step * 1e-9; t += step) {
      const double v = std::abs(t) < step * 1e-9 ? 0.0 : t;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", v);
      out.push_back({v, buf});
    }
    return out;
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  bool log_;
  double lo_ = 0.0, hi_ = 1.0;
};

class Canvas {
 public:
  Canvas(Axis x, Axis y, std::string title, std::string x_label, std::string y_label)
      : x_(std::move(x)), y_(std::move(y)) {
    body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + px(kWidth) + "\" height=\"" +
             px(kHeight) + "\" viewBox=\"0 0 " + px(kWidth) + " " + px(kHeight) + "\">\n";
    body_ += "<rect x=\"0\" y=\"0\" width=\"" + px(kWidth) + "\" height=\"" + px(kHeight) + "\" fill=\"white\"/>\n";
    text(kWidth / 2, kTop - 10, title, "middle", 14);
    text(kLeft + plot_w() / 2, kHeight - 10, x_label, "middle", 12);
    body_ += "<text x=\"15\" y=\"" + px(kTop + plot_h() / 2) + "\" font-family=\"sans-serif\" font-size=\"12\" " +
             "text-anchor=\"middle\" transform=\"rotate(-90 15 " + px(kTop + plot_h() / 2) + ")\">" +
             escape(y_label) + "</text>\n";
    draw_axes();
  }

  const Axis& x() const { return x_; }
  const Axis& y() const { return y_; }

  double sx(double v) const { return kLeft + x_.frac(v) * plot_w(); }
  double sy(double v) const { return kTop + (1.0 - y_.frac(v)) * plot_h(); }

  void marker(double x, double y, const std::string& color) {
    if (!x_.shows(x) || !y_.shows(y)) return;
    body_ += "<circle cx=\"" + px(sx(x)) + "\" cy=\"" + px(sy(y)) + "\" r=\"2\" fill=\"" + color + "\"/>\n";
  }

  // Breaks the line wherever a point cannot be shown.
  void polyline(std::span<const double> xs, std::span<const double> ys, const std::string& color, double width,
                const std::string& dash = {}) {
    std::string pts;
    const auto flush = [&] {
      if (pts.empty()) return;
      body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + px(width) + "\"";
      if (!dash.empty()) body_ += " stroke-dasharray=\"" + dash + "\"";
      body_ += " points=\"" + pts + "\"/>\n";
      pts.clear();
    };
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!x_.shows(xs[i]) || !y_.shows(ys[i])) {
        flush();
        continue;
      }
      if (!pts.empty()) pts += ' ';
      pts += px(sx(xs[i])) + "," + px(sy(ys[i]));
    }
    flush();
  }

  void rect(double x0, double x1, double y0, double y1, const std::string& fill) {
    const double left = sx(x0), right = sx(x1), top = sy(y1), bottom = sy(y0);
    body_ += "<rect x=\"" + px(left) + "\" y=\"" + px(top) + "\" width=\"" + px(right - left) + "\" height=\"" +
             px(bottom - top) + "\" fill=\"" + fill + "\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
  }

  void vline(double x, const std::string& color, const std::string& dash) {
    if (!x_.shows(x)) return;
    body_ += "<line x1=\"" + px(sx(x)) + "\" y1=\"" + px(kTop) + "\" x2=\"" + px(sx(x)) + "\" y2=\"" +
             px(kTop + plot_h()) + "\" stroke=\"" + color + "\" stroke-dasharray=\"" + dash + "\"/>\n";
  }

  void text(double x, double y, std::string_view s, std::string_view anchor, int size) {
    body_ += "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" font-family=\"sans-serif\" font-size=\"" +
             std::to_string(size) + "\" text-anchor=\"" + std::string(anchor) + "\">" + escape(s) + "</text>\n";
  }

  void legend(const std::vector<std::pair<std::string, std::string>>& items) {
    double y = kTop + 15;
    for (const auto& [label, color] : items) {
      const double x = kLeft + plot_w() - 150;
      body_ += "<line x1=\"" + px(x) + "\" y1=\"" + px(y - 4) + "\" x2=\"" + px(x + 20) + "\" y2=\"" + px(y - 4) +
               "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
      text(x + 25, y, label, "start", 11);
      y += 15;
    }
  }

  std::string finish() { return body_ + "</svg>\n"; }

 private:
  static double plot_w() { return kWidth - kLeft - kRight; }
  static double plot_h() { return kHeight - kTop - kBottom; }

  void draw_axes() {
    const double x0 = kLeft, y0 = kTop + plot_h();
    body_ += "<rect x=\"" + px(x0) + "\" y=\"" + px(kTop) + "\" width=\"" + px(plot_w()) + "\" height=\"" +
             px(plot_h()) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (const auto& t : x_.ticks()) {
      const double x = kLeft + (t.value - x_.lo()) / (x_.hi() - x_.lo()) * plot_w();
      body_ += "<line x1=\"" + px(x) + "\" y1=\"" + px(y0) + "\" x2=\"" + px(x) + "\" y2=\"" + px(y0 + 5) +
               "\" stroke=\"black\"/>\n";
      text(x, y0 + 18, t.label, "middle", 10);
    }
    for (const auto& t : y_.ticks()) {
      const double y = kTop + (1.0 - (t.value - y_.lo()) / (y_.hi() - y_.lo())) * plot_h();
      body_ += "<line x1=\"" + px(x0 - 5) + "\" y1=\"" + px(y) + "\" x2=\"" + px(x0) + "\" y2=\"" + px(y) +
               "\" stroke=\"black\"/>\n";
      text(x0 - 8, y + 3, t.label, "end", 10);
    }
  }

  Axis x_, y_;
  std::string body_;
};

std::string_view column_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::Log: return "f_log";
    case ModelFamily::PiecewiseLog: return "f_plog";
    case ModelFamily::Beta: return "f_beta";
  }
  return "f";
}

std::string_view curve_color(ModelFamily f) {
  switch (f) {
    case ModelFamily::Log: return "#1f77b4";
    case ModelFamily::PiecewiseLog: return "#2ca02c";
    case ModelFamily::Beta: return "#d62728";
  }
  return "black";
}

}  // namespace

PlotArtifact spectrum_plot(const RankSpectrum& s, PlotView view, std::span<const ModelFit> fits) {
  const auto y = normalize(s);
  const int n = static_cast<int>(s.size());
  for (const auto& f : fits)
    if (f.n != n) throw std::invalid_argument("fit n does not match the spectrum");

  std::vector<double> ranks(static_cast<std::size_t>(n));
  for (int r = 1; r <= n; ++r) ranks[static_cast<std::size_t>(r - 1)] = r;
  std::vector<std::vector<double>> curves;
  for (const auto& f : fits) {
    std::vector<double> c(static_cast<std::size_t>(n));
    for (int r = 1; r <= n; ++r) c[static_cast<std::size_t>(r - 1)] = eval_model(f, r);
    curves.push_back(std::move(c));
  }

  const bool log_x = view == PlotView::LogLin || view == PlotView::LogLog;
  const bool log_y = view == PlotView::LinLog || view == PlotView::LogLog;
  double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
  const auto extend = [&](double v) {
    if (log_y && !(v > 0.0)) return;
    y_lo = std::min(y_lo, v);
    y_hi = std::max(y_hi, v);
  };
  for (double v : y.values()) extend(v);
  for (const auto& c : curves)
    for (double v : c) extend(v);
  if (!log_y) y_lo = std::min(y_lo, 0.0);

  Canvas canvas(Axis(log_x, 1.0, std::max(1.0, static_cast<double>(n))), Axis(log_y, y_lo, y_hi),
                "ranked spectrum (" + std::string(to_string(view)) + ")", log_x ? "rank (log scale)" : "rank",
                log_y ? "share of total (log scale)" : "share of total");
  for (int r = 1; r <= n; ++r) canvas.marker(r, y.at(static_cast<std::size_t>(r)), "black");
  std::vector<std::pair<std::string, std::string>> legend;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const auto family = fits[i].family();
    canvas.polyline(ranks, curves[i], std::string(curve_color(family)), family == ModelFamily::Beta ? 2.5 : 1.2,
                    family == ModelFamily::PiecewiseLog ? "6,3" : "");
    legend.emplace_back(std::string(to_string(family)), std::string(curve_color(family)));
  }
  if (!legend.empty()) canvas.legend(legend);

  std::string tsv = "rank\ty";
  for (const auto& f : fits) tsv += "\t" + std::string(column_name(f.family()));
  tsv += '\n';
  for (int r = 1; r <= n; ++r) {
    tsv += std::to_string(r) + "\t" + format_number(y.at(static_cast<std::size_t>(r)));
    for (const auto& c : curves) tsv += "\t" + format_number(c[static_cast<std::size_t>(r - 1)]);
    tsv += '\n';
  }
  return {canvas.finish(), std::move(tsv)};
}

PlotArtifact count_histogram_plot(const RankSpectrum& s, int label_top) {
  const auto bins = histogram(s, 1);
  const auto st = descriptive_stats(s);
  std::int64_t max_items = 0;
  for (const auto& b : bins) max_items = std::max(max_items, b.items);
  const double x_hi = static_cast<double>(bins.back().bin_start) + 1.0;

  Canvas canvas(Axis(false, 0.5, x_hi), Axis(false, 0.0, static_cast<double>(max_items) * 1.1),
                "items per count value", "count per item", "number of items");
  for (const auto& b : bins)
    if (b.items > 0)
      canvas.rect(static_cast<double>(b.bin_start) - 0.5, static_cast<double>(b.bin_start) + 0.5, 0.0,
                  static_cast<double>(b.items), "#9ecae1");
  canvas.vline(st.mean, "#d62728", "6,3");
  canvas.vline(std::max(0.5, st.mean - st.sd), "#d62728", "2,2");
  canvas.vline(st.mean + st.sd, "#d62728", "2,2");
  canvas.vline(st.median, "#2ca02c", "6,3");
  canvas.vline(std::max(0.5, st.median - st.mad), "#2ca02c", "2,2");
  canvas.vline(st.median + st.mad, "#2ca02c", "2,2");
  canvas.legend({{"mean +/- sd", "#d62728"}, {"median +/- MAD", "#2ca02c"}});

  // Top labels stacked above their bars, alternating offsets for shared counts.
  const auto top = s.entries().first(std::min<std::size_t>(s.size(), static_cast<std::size_t>(std::max(0, label_top))));
  std::int64_t prev = -1;
  int stack = 0;
  for (const auto& e : top) {
    stack = e.count == prev ? stack + 1 : 0;
    prev = e.count;
    const double item_y = canvas.sy(static_cast<double>(bins[static_cast<std::size_t>(e.count - 1)].items));
    canvas.text(canvas.sx(static_cast<double>(e.count)), item_y - 6 - 11 * stack, e.label, "middle", 9);
  }

  std::string tsv = "bin_start\titems\n";
  for (const auto& b : bins) tsv += std::to_string(b.bin_start) + "\t" + std::to_string(b.items) + "\n";
  return {canvas.finish(), std::move(tsv)};
}

PlotArtifact statistic_histogram_plot(const StatisticHistogram& h) {
  const std::size_t bins = h.counts.size();
  std::int64_t max_count = 0;
  for (auto c : h.counts) max_count = std::max(max_count, c);
  const double x_lo = std::min(h.origin, 0.0);
  const double x_hi = std::max(h.origin + h.bin_width * static_cast<double>(std::max<std::size_t>(bins, 1)), 0.0);

  Canvas canvas(Axis(false, x_lo, x_hi), Axis(false, 0.0, std::max(1.0, static_cast<double>(max_count) * 1.1)),
                "replicate statistic n ln(SSE_plog / SSE_beta)", "statistic", "replicates");
  for (std::size_t i = 0; i < bins; ++i) {
    if (h.counts[i] == 0) continue;
    const double left = h.origin + h.bin_width * static_cast<double>(i);
    canvas.rect(left, left + h.bin_width, 0.0, static_cast<double>(h.counts[i]), "#fdae6b");
  }
  canvas.vline(0.0, "black", "6,3");

  std::string tsv = "bin_lo\tbin_hi\tcount\n";
  for (std::size_t i = 0; i < bins; ++i) {
    const double left = h.origin + h.bin_width * static_cast<double>(i);
    tsv += format_number(left) + "\t" + format_number(left + h.bin_width) + "\t" + std::to_string(h.counts[i]) + "\n";
  }
  return {canvas.finish(), std::move(tsv)};
}

void write_artifact(const PlotArtifact& artifact, const std::filesystem::path& svg_path) {
  auto tsv_path = svg_path;
  tsv_path.replace_extension(".tsv");
  for (const auto& [path, body] : {std::pair{svg_path, &artifact.svg}, std::pair{tsv_path, &artifact.tsv}}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << *body;
    if (!out) throw InputError("error writing '" + path.string() + "'");
  }
}

}  // namespace rankspec
