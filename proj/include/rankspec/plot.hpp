#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "rankspec/fit.hpp"
#include "rankspec/resample.hpp"
#include "rankspec/spectrum.hpp"

namespace rankspec {

// First word is the x axis, second the y axis.
enum class PlotView { LinLin, LogLin, LinLog, LogLog };

std::string_view to_string(PlotView v);
std::optional<PlotView> parse_view(std::string_view name);

/// An SVG document plus the plotted data as TSV.
struct PlotArtifact {
  std::string svg;
  std::string tsv;
};

/// Normalized spectrum against rank, with optional fitted curves. TSV columns
/// are rank, y and one f_<family> column per fit (f_log, f_plog, f_beta).
/// Points a log axis cannot show are left out of the SVG only.
PlotArtifact spectrum_plot(const RankSpectrum& s, PlotView view, std::span<const ModelFit> fits = {});

/// Items per count with bin width 1, marking mean +/- sd, median +/- MAD and
/// the labels of the top `label_top` entries.
PlotArtifact count_histogram_plot(const RankSpectrum& s, int label_top = 15);

/// Replicate statistic histogram; the zero line marks where the two models tie.
PlotArtifact statistic_histogram_plot(const StatisticHistogram& h);

/// Writes `svg_path` and the TSV next to it (same stem, .tsv). Throws InputError.
void write_artifact(const PlotArtifact& artifact, const std::filesystem::path& svg_path);

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

}  // namespace rankspec
