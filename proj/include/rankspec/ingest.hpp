#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankspec/fit.hpp"
#include "rankspec/spectrum.hpp"

namespace rankspec {

struct PinyinSyllable {
  std::string base;  // lowercase letters, 'v' for u-umlaut
  int tone = 1;      // 1-4, or 5 for the neutral tone

  std::string canonical() const { return base + static_cast<char>('0' + tone); }
  bool operator==(const PinyinSyllable&) const = default;
};

/// Parses a toned syllable such as "hao3". "u:" and "ü" are read as 'v'.
/// Non-strict mode also accepts tone 0 or 5 (both become 5); strict mode
/// allows tones 1-4 only and requires a base from the bundled inventory.
/// Throws InputError.
PinyinSyllable validate_pinyin(std::string_view token, bool strict = false);

/// The bundled base-syllable inventory, sorted. Approximate: about 410 bases.
std::span<const std::string> pinyin_inventory();
bool is_known_base(std::string_view base);

/// "label,count" lines. '#' lines, blank lines and an optional
/// "syllable,count" header are skipped; CRLF is accepted. Throws ParseError.
std::vector<SpectrumEntry> parse_counts_file(std::string_view content);

/// Header plus one "label,count" line per entry, LF line endings.
std::string write_counts_file(std::span<const SpectrumEntry> entries);

/// "character<TAB>pinyin" lines; each distinct (character, syllable) pair adds
/// one to that syllable. Labels come out in order of first appearance.
std::vector<SpectrumEntry> parse_pairs_file(std::string_view content, bool strict = false);

/// Whole file as bytes. Throws InputError when it cannot be read.
std::string read_text_file(const std::filesystem::path& path);

struct FixtureSpec {
  int n_syllables = 1280;
  std::int64_t total_characters = 9505;
  std::vector<SpectrumEntry> top15 = {
      {"yi4", 83}, {"xi1", 76}, {"bi4", 58}, {"yu4", 57},  {"fu2", 52},
      {"zhi4", 50}, {"ji4", 48}, {"li4", 47}, {"yu2", 45},  {"ji1", 43},
      {"qi2", 39}, {"shi4", 39}, {"jue2", 36}, {"ji2", 34}, {"hui4", 34},
  };
  int singleton_count = 203;
  std::int64_t median_target = 5;
  std::int64_t mad_target = 3;
  std::int64_t middle_min = 2;
  std::int64_t middle_max = 34;
  // Mean curve for the middle ranks: beta_weight * Beta + (1 - beta_weight) * log line,
  // each scaled to the middle mass.
  BetaParams beta{5.95e-6, 0.324, 1.025};
  double log_intercept = 0.00532;
  double log_slope = -0.000739;
  double beta_weight = 0.2;
  std::uint64_t seed = 1;
};

/// Deterministic for a given spec. Middle entries are labelled "s0016"..,
/// singletons continue the numbering. Throws InputError when the spec is
/// infeasible. Entries come out in rank order.
std::vector<SpectrumEntry> generate_fixture(const FixtureSpec& spec = {});

enum class Noise { None, Poisson };

/// Evaluates the model at ranks 1..n, scales to `total`, then rounds to
/// max(1, round(v)) or draws Pois(v) and drops zeros. Labels "r0001"...
/// Throws std::invalid_argument when the model is non-positive at some rank.
std::vector<SpectrumEntry> generate_from_model(const ModelParams& params, int n, std::int64_t total, Noise noise,
                                               std::uint64_t seed = 1);

}  // namespace rankspec
